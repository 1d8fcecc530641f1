#pragma once

#include <cstdint>

#include "occlusym/attention.hpp"
#include "occlusym/nn.hpp"

namespace occlusym {

struct BlockConfig {
  int width = 32;       // C
  int cond_width = 64;  // C'
  int occ_width = 64;   // width of the replicated occlusion tokens
  int heads = 2;
  int head_dim = 16;
  int mlp_hidden = 128;
  int time_dim = 32;
};

// Transformer block with self-attention, mask-weighted cross-attention, the
// occlusion-aware cross-attention and an MLP, each on a pre-norm residual
// branch. Time enters as an additive shift after the first norm.
struct BlockParams {
  LayerNormParams norm_self;
  LayerNormParams norm_cross;
  LayerNormParams norm_occ;
  LayerNormParams norm_mlp;
  LinearParams time_embed;  // time_dim -> C
  AttentionParams self_attn;
  AttentionParams cross_attn;
  AttentionParams occ_attn;
  MlpParams mlp;

  template <typename F>
  void visit(F&& f) {
    auto sub = [&](const char* prefix, auto& group) {
      group.visit([&](const std::string& n, Mat& m) { f(std::string(prefix) + "." + n, m); });
    };
    sub("norm_self", norm_self);
    sub("norm_cross", norm_cross);
    sub("norm_occ", norm_occ);
    sub("norm_mlp", norm_mlp);
    sub("time_embed", time_embed);
    sub("self_attn", self_attn);
    sub("cross_attn", cross_attn);
    sub("occ_attn", occ_attn);
    sub("mlp", mlp);
  }
};

BlockParams make_block(const BlockConfig& cfg, Rng& rng);

// Per-sample conditioning seen by every block.
struct BlockConditioning {
  Mat cond;        // K x C'
  Vec c_vis;       // K
  Mat occ_stack;   // K x occ_width
};

struct BlockCache {
  LayerNormCache ln_self, ln_cross, ln_occ, ln_mlp;
  RowVec temb;
  AttentionCache self_attn, cross_attn, occ_attn;
  MlpCache mlp;
};

Mat block_forward(const Mat& latents, const BlockConditioning& cond, double t, const BlockParams& p,
                  BlockCache* cache = nullptr);

struct BlockInputGrads {
  Mat dlatents;
  Mat dcond;
  Mat docc_stack;
};

BlockInputGrads block_backward(const Mat& dy, const BlockCache& cache, const BlockParams& p, BlockParams& grad);

}  // namespace occlusym
