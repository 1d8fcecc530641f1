#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occlusym/nn.hpp"
#include "occlusym/patch_tokens.hpp"
#include "occlusym/tensor.hpp"

namespace occlusym {

// Multi-head attention projections. Queries come from tokens of width C,
// keys and values from context tokens of width C'.
struct AttentionParams {
  int heads = 1;
  int head_dim = 1;
  Mat w_q;    // C x H*D
  Mat w_kv;   // C' x 2*H*D, keys in the first H*D columns
  Mat w_out;  // H*D x C
  Mat b_out;  // 1 x C

  int width() const { return static_cast<int>(w_q.rows()); }
  int context_width() const { return static_cast<int>(w_kv.rows()); }
  void validate() const;

  template <typename F>
  void visit(F&& f) {
    f("w_q", w_q);
    f("w_kv", w_kv);
    f("w_out", w_out);
    f("b_out", b_out);
  }
};

AttentionParams make_attention(int width, int context_width, int heads, int head_dim, Rng& rng,
                               double out_scale = 1.0);

// Row-wise A[i,j] = w[j] exp(S[i,j]) / sum_k w[k] exp(S[i,k]). The row max is
// taken over positive-weight columns only and zero-weight columns are never
// exponentiated, so A is exactly 0 there.
Mat weighted_softmax(const Mat& scores, const Vec& key_weights);

// softmax(S + log w) with log 0 = -inf.
Mat additive_log_softmax(const Mat& scores, const Vec& key_weights);

struct AttentionCache {
  Mat x;
  Mat context;
  Mat q;
  Mat kv;
  Mat concat;
  std::vector<Mat> attn;  // per head, L x K
};

// Shared core. `key_weights` may be null (plain softmax attention).
Mat attention_forward(const Mat& x, const Mat& context, const Vec* key_weights, const AttentionParams& p,
                      AttentionCache* cache);

struct AttentionInputGrads {
  Mat dx;
  Mat dcontext;
};

// Accumulates into `grad` and returns input gradients.
AttentionInputGrads attention_backward(const Mat& dy, const AttentionCache& cache, const AttentionParams& p,
                                       AttentionParams& grad);

// Cross-attention from latents to conditioning tokens with every head's
// attention modulated by the per-token visibility weights.
Mat mask_weighted_cross_attention(const Mat& latents, const Mat& cond, const PatchWeightVector& c_vis,
                                  const AttentionParams& p, AttentionCache* cache = nullptr);

// Plain cross-attention over the replicated occlusion-weight tokens.
Mat occlusion_aware_attention(const Mat& latents, const Mat& occ_stack, const AttentionParams& p,
                              AttentionCache* cache = nullptr);

Mat self_attention(const Mat& x, const AttentionParams& p, AttentionCache* cache = nullptr);

// Throws DegenerateConditioningError when no weight is positive and
// ShapeError on a length mismatch.
void check_key_weights(const Vec& w, Eigen::Index keys);

}  // namespace occlusym
