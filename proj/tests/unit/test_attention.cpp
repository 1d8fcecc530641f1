#include <gtest/gtest.h>

#include <cmath>

#include "gradcases.hpp"
#include "occlusym/attention.hpp"
#include "occlusym/block.hpp"
#include "occlusym/error.hpp"
#include "occlusym/rng.hpp"
#include "oracles.hpp"

using namespace occlusym;

namespace {

Mat normal(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Textbook multi-head cross-attention, written out per head.
Mat plain_attention(const Mat& x, const Mat& ctx, const AttentionParams& p) {
  const int hd = p.heads * p.head_dim;
  const Mat q = x * p.w_q, k = ctx * p.w_kv.leftCols(hd), v = ctx * p.w_kv.rightCols(hd);
  Mat concat(x.rows(), hd);
  for (int h = 0; h < p.heads; ++h) {
    const Mat s = q.middleCols(h * p.head_dim, p.head_dim) * k.middleCols(h * p.head_dim, p.head_dim).transpose() /
                  std::sqrt(static_cast<double>(p.head_dim));
    Mat a(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double m = s.row(i).maxCoeff();
      const RowVec e = (s.row(i).array() - m).exp().matrix();
      a.row(i) = e / e.sum();
    }
    concat.middleCols(h * p.head_dim, p.head_dim) = a * v.middleCols(h * p.head_dim, p.head_dim);
  }
  return concat * p.w_out + p.b_out.replicate(x.rows(), 1);
}

}  // namespace

TEST(WeightedSoftmax, HandExample) {
  Mat s(2, 3);
  s << 0, 0, 0, 1, 0, -1;
  Vec w(3);
  w << 0.5, 1.0, 0.0;
  const Mat a = weighted_softmax(s, w);
  const double e = std::exp(1.0);
  EXPECT_NEAR(a(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(a(0, 1), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(a(0, 2), 0.0);
  EXPECT_NEAR(a(1, 0), 0.5 * e / (0.5 * e + 1.0), 1e-15);
  EXPECT_NEAR(a(1, 1), 1.0 / (0.5 * e + 1.0), 1e-15);
  EXPECT_EQ(a(1, 2), 0.0);
}

TEST(WeightedSoftmax, MatchesDirectEvaluationAndAdditiveForm) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat s = 3.0 * normal(rng, 5, 7);
    Vec w(7);
    for (int j = 0; j < 7; ++j) w(j) = rng.uniform();
    w(static_cast<Eigen::Index>(rng.uniform_int(0, 6))) = 0.0;
    w(static_cast<Eigen::Index>(rng.uniform_int(0, 6))) = 0.0;
    const Mat a = weighted_softmax(s, w);
    EXPECT_LE((a - oracle::weighted_attention_rows(s, w)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((a - additive_log_softmax(s, w)).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 0; j < 7; ++j)
      if (w(j) == 0.0) {
        EXPECT_EQ(a.col(j).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(additive_log_softmax(s, w).col(j).cwiseAbs().maxCoeff(), 0.0);
      }
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(a.row(i).sum(), 1.0, 1e-12);
    // Rescaling the weights leaves the attention unchanged.
    EXPECT_LE((weighted_softmax(s, 3.7 * w) - a).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(WeightedSoftmax, OnesReduceToSoftmax) {
  Rng rng(2);
  const Mat s = normal(rng, 4, 6);
  const Mat a = weighted_softmax(s, Vec::Ones(6));
  for (Eigen::Index i = 0; i < 4; ++i) {
    const RowVec e = (s.row(i).array() - s.row(i).maxCoeff()).exp().matrix();
    EXPECT_LE((a.row(i) - e / e.sum()).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_LE((additive_log_softmax(s, Vec::Ones(6)) - a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WeightedSoftmax, ExtremeScoresStayFinite) {
  Mat s(1, 3);
  s << 800.0, -800.0, 900.0;
  Vec w(3);
  w << 1.0, 1.0, 0.0;
  const Mat a = weighted_softmax(s, w);
  EXPECT_EQ(a(0, 0), 1.0);
  EXPECT_EQ(a(0, 2), 0.0);
}

TEST(MaskWeightedAttention, OnesEqualPlainCrossAttention) {
  Rng rng(3);
  const auto p = make_attention(5, 4, 2, 3, rng);
  const Mat x = normal(rng, 6, 5), ctx = normal(rng, 7, 4);
  const Mat out = mask_weighted_cross_attention(x, ctx, {Vec::Ones(7), 0}, p);
  EXPECT_LE((out - plain_attention(x, ctx, p)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MaskWeightedAttention, OneHotAttendsSingleToken) {
  Rng rng(4);
  const auto p = make_attention(4, 3, 2, 2, rng);
  const Mat x = normal(rng, 5, 4), ctx = normal(rng, 6, 3);
  Vec w = Vec::Zero(6);
  w(4) = 0.3;
  const Mat out = mask_weighted_cross_attention(x, ctx, {w, 0}, p);
  const RowVec v = ctx.row(4) * p.w_kv.rightCols(4);
  const RowVec expect = v * p.w_out + p.b_out;
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_LE((out.row(i) - expect).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(MaskWeightedAttention, PermutationEquivariant) {
  Rng rng(5);
  const auto p = make_attention(4, 3, 2, 2, rng);
  const Mat x = normal(rng, 5, 4), ctx = normal(rng, 6, 3);
  Vec w(6);
  w << 0.2, 0.0, 1.0, 0.5, 0.9, 0.1;
  const std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  Mat ctx_p(6, 3);
  Vec w_p(6);
  for (int i = 0; i < 6; ++i) {
    ctx_p.row(i) = ctx.row(perm[i]);
    w_p(i) = w(perm[i]);
  }
  const Mat a = mask_weighted_cross_attention(x, ctx, {w, 0}, p);
  const Mat b = mask_weighted_cross_attention(x, ctx_p, {w_p, 0}, p);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(MaskWeightedAttention, RejectsBadWeights) {
  Rng rng(6);
  const auto p = make_attention(4, 3, 1, 2, rng);
  const Mat x = normal(rng, 2, 4), ctx = normal(rng, 3, 3);
  EXPECT_THROW(mask_weighted_cross_attention(x, ctx, {Vec::Zero(3), 0}, p), DegenerateConditioningError);
  EXPECT_THROW(mask_weighted_cross_attention(x, ctx, {Vec::Ones(2), 0}, p), ShapeError);
  Vec neg = Vec::Ones(3);
  neg(1) = -0.1;
  EXPECT_THROW(mask_weighted_cross_attention(x, ctx, {neg, 0}, p), ParameterError);
}

TEST(OcclusionAttention, ConstantStackIsUniform) {
  Rng rng(7);
  const auto p = make_attention(4, 3, 2, 2, rng);
  const Mat x = normal(rng, 3, 4);
  AttentionCache cache;
  occlusion_aware_attention(x, stack_occlusion_tokens({Vec::Ones(5), 1}, 3), p, &cache);
  for (const auto& a : cache.attn) EXPECT_LE((a.array() - 0.2).abs().maxCoeff(), 1e-15);
}

TEST(OcclusionAttention, HandSetWeightsMatchDirectEvaluation) {
  AttentionParams p;
  p.heads = 1;
  p.head_dim = 1;
  p.w_q = Mat::Constant(1, 1, 2.0);
  p.w_kv.resize(1, 2);
  p.w_kv << 1.0, 1.0;
  p.w_out = Mat::Constant(1, 1, 1.0);
  p.b_out = Mat::Zero(1, 1);
  Mat x(1, 1);
  x << 1.0;
  Mat stack(3, 1);
  stack << 1.0, 0.0, 0.5;
  const Mat out = occlusion_aware_attention(x, stack, p);
  // q = 2, k = v = stack, S = 2 * k.
  const double e0 = std::exp(2.0), e1 = 1.0, e2 = std::exp(1.0);
  EXPECT_NEAR(out(0, 0), (e0 * 1.0 + e2 * 0.5) / (e0 + e1 + e2), 1e-15);
}

TEST(Block, ZeroWeightsAreIdentity) {
  Rng rng(8);
  BlockConfig cfg{4, 3, 3, 2, 2, 16, 4};
  BlockParams p = make_block(cfg, rng);
  p.visit([](const std::string&, Mat& m) { m.setZero(); });
  const Mat x = normal(rng, 5, 4);
  BlockConditioning cond{normal(rng, 6, 3), Vec::Ones(6), stack_occlusion_tokens({Vec::Ones(6), 0}, 3)};
  EXPECT_EQ(block_forward(x, cond, 0.3, p), x);
}

TEST(Block, MatchesStraightLineComposition) {
  Rng rng(9);
  BlockConfig cfg{4, 3, 5, 2, 2, 16, 6};
  BlockParams p = make_block(cfg, rng);
  p.visit([&](const std::string&, Mat& m) { m += 0.3 * normal(rng, m.rows(), m.cols()); });
  const Mat x = normal(rng, 5, 4);
  Vec w(6);
  w << 1, 0, 0.5, 0.25, 1, 0;
  BlockConditioning cond{normal(rng, 6, 3), w, stack_occlusion_tokens({w, 0}, 5)};
  const double t = 0.37;

  auto ln = [](const Mat& m, const LayerNormParams& n) {
    Mat out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double mu = m.row(i).mean();
      const double var = (m.row(i).array() - mu).square().mean();
      out.row(i) = ((m.row(i).array() - mu) / std::sqrt(var + kLayerNormEps)).matrix();
      out.row(i) = out.row(i).cwiseProduct(n.gamma) + n.beta;
    }
    return out;
  };
  const RowVec temb = timestep_embedding(t, cfg.time_dim) * p.time_embed.w + p.time_embed.b;
  Mat h = x;
  h += plain_attention(ln(h, p.norm_self) + temb.replicate(5, 1), ln(h, p.norm_self) + temb.replicate(5, 1), p.self_attn);
  // Mask-weighted branch, attention rows evaluated directly.
  {
    const Mat q = ln(h, p.norm_cross);
    const int hd = cfg.heads * cfg.head_dim;
    const Mat qq = q * p.cross_attn.w_q, k = cond.cond * p.cross_attn.w_kv.leftCols(hd),
              v = cond.cond * p.cross_attn.w_kv.rightCols(hd);
    Mat concat(5, hd);
    for (int hh = 0; hh < cfg.heads; ++hh) {
      const Mat s = qq.middleCols(hh * 2, 2) * k.middleCols(hh * 2, 2).transpose() / std::sqrt(2.0);
      concat.middleCols(hh * 2, 2) = oracle::weighted_attention_rows(s, w) * v.middleCols(hh * 2, 2);
    }
    h += concat * p.cross_attn.w_out + p.cross_attn.b_out.replicate(5, 1);
  }
  h += plain_attention(ln(h, p.norm_occ), cond.occ_stack, p.occ_attn);
  {
    const Mat a = ln(h, p.norm_mlp) * p.mlp.fc1.w + p.mlp.fc1.b.replicate(5, 1);
    const Mat g = a.unaryExpr([](double z) { return 0.5 * z * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (z + 0.044715 * z * z * z))); });
    h += g * p.mlp.fc2.w + p.mlp.fc2.b.replicate(5, 1);
  }
  EXPECT_LE((block_forward(x, cond, t, p) - h).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Block, TimeEntersOnlyThroughTimeEmbedding) {
  Rng rng(10);
  BlockConfig cfg{4, 3, 3, 1, 2, 16, 4};
  BlockParams p = make_block(cfg, rng);
  const Mat x = normal(rng, 3, 4);
  BlockConditioning cond{normal(rng, 4, 3), Vec::Ones(4), stack_occlusion_tokens({Vec::Ones(4), 0}, 3)};
  EXPECT_GT((block_forward(x, cond, 0.1, p) - block_forward(x, cond, 0.9, p)).cwiseAbs().maxCoeff(), 0.0);
  p.time_embed.w.setZero();
  p.time_embed.b.setZero();
  EXPECT_EQ(block_forward(x, cond, 0.1, p), block_forward(x, cond, 0.9, p));
}

TEST(GradCheck, MaskWeightedAttention) {
  for (std::uint64_t s = 0; s < 10; ++s) EXPECT_LT(oracle::check_mask_weighted_attention(s).rel_error, 1e-5) << s;
}

TEST(GradCheck, OcclusionAttention) {
  for (std::uint64_t s = 0; s < 10; ++s) EXPECT_LT(oracle::check_occlusion_attention(s).rel_error, 1e-5) << s;
}

TEST(GradCheck, Block) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = oracle::check_block(s);
    EXPECT_LT(r.rel_error, 1e-5) << s << " worst " << r.worst;
  }
}

TEST(GradCheck, FlowLossThroughModel) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const auto r = oracle::check_flow_loss(s);
    EXPECT_LT(r.rel_error, 1e-5) << s << " worst " << r.worst;
  }
}
