#pragma once

#include <cstdint>
#include <vector>

#include "occlusym/block.hpp"
#include "occlusym/mask2d.hpp"
#include "occlusym/patch_tokens.hpp"

namespace occlusym {

struct FlowModelConfig {
  int latent_tokens = 512;   // r^3 for stage 1, L for stage 2
  int latent_features = 8;   // per-token width of the latent
  // Edge of the cubic group of latent tokens merged into one transformer
  // token (1 disables). Requires latent_tokens = r^3 with r divisible by it.
  int patchify = 1;
  int n_blocks = 4;
  BlockConfig block;
  TokenGridSpec grid{32, 4, 5};
  int image_channels = 1;
  std::uint64_t seed = 0;

  void validate() const;
  int cond_tokens() const { return token_count(grid); }
  int model_tokens() const;
  int model_features() const { return latent_features * patchify * patchify * patchify; }
};

// Groups p^3 neighbouring tokens of an r^3 token grid (x-major) into one
// token; features are concatenated in x-major order within the group.
Mat patchify_tokens(const Mat& tokens, int patch);
Mat unpatchify_tokens(const Mat& tokens, int patch, int features);

// Denoiser: latent tokens -> input projection + positional code -> blocks ->
// final norm -> output projection. The patch embedder is fixed; the null
// conditioning tokens used for classifier-free guidance are learned.
struct FlowModel {
  FlowModelConfig config;
  LinearParams input;
  Mat latent_pos;  // model_tokens x C
  std::vector<BlockParams> blocks;
  LayerNormParams final_norm;
  LinearParams output;
  Mat null_tokens;  // K x C'
  PatchEmbedder embedder;

  // Trainable parameters only.
  template <typename F>
  void visit(F&& f) {
    auto sub = [&](const std::string& prefix, auto& group) {
      group.visit([&](const std::string& n, Mat& m) { f(prefix + "." + n, m); });
    };
    sub("input", input);
    f("latent_pos", latent_pos);
    for (std::size_t i = 0; i < blocks.size(); ++i) sub("blocks." + std::to_string(i), blocks[i]);
    sub("final_norm", final_norm);
    sub("output", output);
    f("null_tokens", null_tokens);
  }

  // Trainable parameters followed by the fixed embedder.
  template <typename F>
  void visit_all(F&& f) {
    visit(f);
    embedder.visit([&](const std::string& n, Mat& m) { f("embedder." + n, m); });
  }
};

FlowModel make_flow_model(const FlowModelConfig& config);

// One conditioning view: tokens of the occluded image plus the per-token
// visibility and occlusion weights.
struct ViewCondition {
  Mat tokens;  // K x C'
  PatchWeightVector c_vis;
  PatchWeightVector c_occ;
  std::size_t visibility_count = 0;  // |M_vis|
  bool is_null = false;
};

// Builds the condition for `image` seen through M_vis = obj AND NOT occ. The
// image is pre-multiplied by M_vis before embedding. Throws
// DegenerateConditioningError when nothing is visible.
ViewCondition make_view_condition(const Image& image, const BinaryMask& obj, const BinaryMask& occ,
                                  const PatchEmbedder& embedder);

// Learned null tokens with weight 1 on the prefix tokens and 0 elsewhere.
ViewCondition null_condition(const FlowModel& model);

struct FlowCache {
  Mat x_in;
  std::vector<Mat> block_inputs;
  std::vector<BlockCache> blocks;
  Mat pre_out;
  LayerNormCache final_norm;
  bool used_null = false;
};

// Velocity prediction for noisy latents at noise level t.
Mat flow_forward(const FlowModel& model, const Mat& noisy, const ViewCondition& view, double t,
                 FlowCache* cache = nullptr);

// Accumulates parameter gradients (including null tokens when the null
// condition was used) and returns dL/d(noisy).
Mat flow_backward(const Mat& dvelocity, const FlowCache& cache, const FlowModel& model, FlowModel& grad);

}  // namespace occlusym
