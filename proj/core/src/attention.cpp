#include "occlusym/attention.hpp"

#include <cmath>
#include <limits>

#include "occlusym/error.hpp"

namespace occlusym {

void AttentionParams::validate() const {
  const Eigen::Index hd = static_cast<Eigen::Index>(heads) * head_dim;
  if (heads <= 0 || head_dim <= 0) throw ParameterError("AttentionParams: heads and head_dim must be positive");
  if (w_q.cols() != hd || w_kv.cols() != 2 * hd || w_out.rows() != hd || w_out.cols() != w_q.rows() ||
      b_out.rows() != 1 || b_out.cols() != w_q.rows())
    throw ShapeError("AttentionParams: inconsistent projection shapes");
}

AttentionParams make_attention(int width, int context_width, int heads, int head_dim, Rng& rng,
                               double out_scale) {
  AttentionParams p;
  p.heads = heads;
  p.head_dim = head_dim;
  const int hd = heads * head_dim;
  p.w_q = make_linear(width, hd, rng).w;
  p.w_kv = make_linear(context_width, 2 * hd, rng).w;
  p.w_out = make_linear(hd, width, rng, out_scale).w;
  p.b_out = Mat::Zero(1, width);
  return p;
}

void check_key_weights(const Vec& w, Eigen::Index keys) {
  if (w.size() != keys) throw ShapeError("key weights length does not match the number of keys");
  bool any = false;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (!(w[j] >= 0.0) || !std::isfinite(w[j])) throw ParameterError("key weights must be finite and non-negative");
    any = any || w[j] > 0.0;
  }
  if (!any) throw DegenerateConditioningError("all key weights are zero: nothing visible to attend to");
}

Mat weighted_softmax(const Mat& scores, const Vec& key_weights) {
  check_key_weights(key_weights, scores.cols());
  Mat a(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
      if (key_weights[j] > 0.0) m = std::max(m, scores(i, j));
    double denom = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const double e = key_weights[j] > 0.0 ? key_weights[j] * std::exp(scores(i, j) - m) : 0.0;
      a(i, j) = e;
      denom += e;
    }
    a.row(i) /= denom;
  }
  return a;
}

Mat additive_log_softmax(const Mat& scores, const Vec& key_weights) {
  check_key_weights(key_weights, scores.cols());
  Mat biased = scores;
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    const double bias = key_weights[j] > 0.0 ? std::log(key_weights[j]) : -std::numeric_limits<double>::infinity();
    biased.col(j).array() += bias;
  }
  Mat a(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = biased.row(i).maxCoeff();
    // Scalar exp keeps exp(-inf) == 0 exactly; the vectorized one does not.
    for (Eigen::Index j = 0; j < scores.cols(); ++j) a(i, j) = std::exp(biased(i, j) - m);
    a.row(i) /= a.row(i).sum();
  }
  return a;
}

namespace {

void softmax_rows_inplace(Mat& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - m).exp();
    s.row(i) /= s.row(i).sum();
  }
}

}  // namespace

Mat attention_forward(const Mat& x, const Mat& context, const Vec* key_weights, const AttentionParams& p,
                      AttentionCache* cache) {
  p.validate();
  if (x.cols() != p.width()) throw ShapeError("attention: query width mismatch");
  if (context.cols() != p.context_width()) throw ShapeError("attention: context width mismatch");
  if (key_weights) check_key_weights(*key_weights, context.rows());

  const int hd = p.heads * p.head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.head_dim));
  Mat q = x * p.w_q;
  Mat kv = context * p.w_kv;
  Mat concat(x.rows(), hd);
  std::vector<Mat> attn;
  if (cache) attn.reserve(static_cast<std::size_t>(p.heads));
  for (int h = 0; h < p.heads; ++h) {
    const auto qh = q.middleCols(h * p.head_dim, p.head_dim);
    const auto kh = kv.middleCols(h * p.head_dim, p.head_dim);
    const auto vh = kv.middleCols(hd + h * p.head_dim, p.head_dim);
    Mat s = (qh * kh.transpose()) * scale;
    Mat a;
    if (key_weights) {
      a = weighted_softmax(s, *key_weights);
    } else {
      softmax_rows_inplace(s);
      a = std::move(s);
    }
    concat.middleCols(h * p.head_dim, p.head_dim).noalias() = a * vh;
    if (cache) attn.push_back(std::move(a));
  }
  Mat y = concat * p.w_out;
  y.rowwise() += p.b_out.row(0);
  if (cache) {
    cache->x = x;
    cache->context = context;
    cache->q = std::move(q);
    cache->kv = std::move(kv);
    cache->concat = std::move(concat);
    cache->attn = std::move(attn);
  }
  return y;
}

AttentionInputGrads attention_backward(const Mat& dy, const AttentionCache& cache, const AttentionParams& p,
                                       AttentionParams& grad) {
  const int hd = p.heads * p.head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.head_dim));
  grad.w_out.noalias() += cache.concat.transpose() * dy;
  grad.b_out.row(0) += dy.colwise().sum();
  const Mat dconcat = dy * p.w_out.transpose();

  Mat dq(cache.q.rows(), hd);
  Mat dkv(cache.kv.rows(), 2 * hd);
  for (int h = 0; h < p.heads; ++h) {
    const Mat& a = cache.attn[static_cast<std::size_t>(h)];
    const auto qh = cache.q.middleCols(h * p.head_dim, p.head_dim);
    const auto kh = cache.kv.middleCols(h * p.head_dim, p.head_dim);
    const auto vh = cache.kv.middleCols(hd + h * p.head_dim, p.head_dim);
    const auto dout = dconcat.middleCols(h * p.head_dim, p.head_dim);

    const Mat da = dout * vh.transpose();
    dkv.middleCols(hd + h * p.head_dim, p.head_dim).noalias() = a.transpose() * dout;
    // Softmax Jacobian; identical for the weighted form since A = softmax(S + log w).
    const Vec row_dot = (da.array() * a.array()).rowwise().sum();
    const Mat ds = (a.array() * (da.colwise() - row_dot).array()) * scale;
    dq.middleCols(h * p.head_dim, p.head_dim).noalias() = ds * kh;
    dkv.middleCols(h * p.head_dim, p.head_dim).noalias() = ds.transpose() * qh;
  }
  grad.w_q.noalias() += cache.x.transpose() * dq;
  grad.w_kv.noalias() += cache.context.transpose() * dkv;
  return {dq * p.w_q.transpose(), dkv * p.w_kv.transpose()};
}

Mat mask_weighted_cross_attention(const Mat& latents, const Mat& cond, const PatchWeightVector& c_vis,
                                  const AttentionParams& p, AttentionCache* cache) {
  if (c_vis.size() != cond.rows()) throw ShapeError("mask_weighted_cross_attention: c_vis length != cond rows");
  return attention_forward(latents, cond, &c_vis.values, p, cache);
}

Mat occlusion_aware_attention(const Mat& latents, const Mat& occ_stack, const AttentionParams& p,
                              AttentionCache* cache) {
  return attention_forward(latents, occ_stack, nullptr, p, cache);
}

Mat self_attention(const Mat& x, const AttentionParams& p, AttentionCache* cache) {
  return attention_forward(x, x, nullptr, p, cache);
}

}  // namespace occlusym
