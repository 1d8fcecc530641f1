#include <gtest/gtest.h>

#include "occlusym/error.hpp"
#include "occlusym/io.hpp"
#include "occlusym/mask2d.hpp"
#include "occlusym/rng.hpp"
#include "oracles.hpp"

using namespace occlusym;

namespace {

BinaryMask from_rows(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m.set(x, y, rows[y][x] == '#');
  return m;
}

OcclusionParams no_shapes() {
  OcclusionParams p;
  p.n_lines = p.n_circles = p.n_ellipses = p.n_rects = {0, 0};
  return p;
}

}  // namespace

TEST(Masks2d, MatchesUnionOracleAt512Seed7) {
  const OcclusionParams p;
  const auto mask = gen_random_occlusion(512, 512, p, 7);
  const double r = mask_ratio(mask);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
  EXPECT_EQ(mask, oracle::union_of_shapes(sample_occlusion_shapes(512, 512, p, 7), 512, 512));
}

TEST(Masks2d, MatchesUnionOracleAcrossSeedsAndSizes) {
  const OcclusionParams p;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int w = 40 + static_cast<int>(seed) * 7, h = 64 - static_cast<int>(seed);
    EXPECT_EQ(gen_random_occlusion(w, h, p, seed), oracle::union_of_shapes(sample_occlusion_shapes(w, h, p, seed), w, h))
        << "seed " << seed;
  }
}

TEST(Masks2d, ShapeCountsFollowRanges) {
  OcclusionParams p;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto shapes = sample_occlusion_shapes(128, 96, p, seed);
    int counts[4] = {0, 0, 0, 0};
    for (const auto& s : shapes) ++counts[s.index()];
    EXPECT_GE(counts[0], 1);
    EXPECT_LE(counts[0], 3);
    EXPECT_GE(counts[1], 1);
    EXPECT_LE(counts[1], 3);
    EXPECT_GE(counts[2], 1);
    EXPECT_LE(counts[2], 3);
    EXPECT_GE(counts[3], 3);
    EXPECT_LE(counts[3], 7);
    // Drawing order: lines, circles, ellipses, rectangles.
    for (std::size_t i = 1; i < shapes.size(); ++i) EXPECT_LE(shapes[i - 1].index(), shapes[i].index());
  }
}

TEST(Masks2d, NoShapesGivesEmptyMask) {
  EXPECT_EQ(gen_random_occlusion(33, 17, no_shapes(), 3).count(), 0u);
}

TEST(Masks2d, FullRectangleSaturates) {
  const auto m = rasterize_shape(RectShape{0.0, 0.0, 20.0, 10.0, 0}, 20, 10);
  EXPECT_EQ(m.count(), 200u);
}

TEST(Masks2d, Deterministic) {
  const OcclusionParams p;
  EXPECT_EQ(gen_random_occlusion(64, 48, p, 11), gen_random_occlusion(64, 48, p, 11));
  EXPECT_NE(gen_random_occlusion(64, 48, p, 11), gen_random_occlusion(64, 48, p, 12));
}

TEST(Masks2d, DilationDefaultScalesWithResolution) {
  const OcclusionParams p;
  EXPECT_EQ(p.effective_dilation(512, 512), 4);
  EXPECT_EQ(p.effective_dilation(1024, 256), 2);
  EXPECT_EQ(p.effective_dilation(32, 32), 0);
  OcclusionParams q;
  q.dilation_radius = 3;
  EXPECT_EQ(q.effective_dilation(32, 32), 3);
}

TEST(Masks2d, DilateSquareGrowsSinglePixel) {
  BinaryMask m(7, 7);
  m.set(3, 3);
  const auto d = dilate_square(m, 1);
  EXPECT_EQ(d.count(), 9u);
  for (int y = 2; y <= 4; ++y)
    for (int x = 2; x <= 4; ++x) EXPECT_TRUE(d.at(x, y));
  BinaryMask corner(5, 5);
  corner.set(0, 0);
  EXPECT_EQ(dilate_square(corner, 2).count(), 9u);
}

TEST(Masks2d, InvalidParamsRejected) {
  OcclusionParams p;
  p.n_rects = {5, 2};
  EXPECT_THROW(gen_random_occlusion(10, 10, p, 0), ParameterError);
  OcclusionParams q;
  q.n_lines = {-1, 2};
  EXPECT_THROW(gen_random_occlusion(10, 10, q, 0), ParameterError);
  EXPECT_THROW(gen_random_occlusion(0, 10, OcclusionParams{}, 0), ParameterError);
}

TEST(VisibleMask, BottomLeftQuadrant) {
  const auto obj = from_rows({"##..", "##..", "##..", "##.."});
  const auto occ = from_rows({"####", "####", "....", "...."});
  EXPECT_EQ(visible_mask(obj, occ), from_rows({"....", "....", "##..", "##.."}));
}

TEST(VisibleMask, IdentityAndFullOcclusion) {
  const auto obj = from_rows({"#.#", ".##"});
  EXPECT_EQ(visible_mask(obj, BinaryMask(3, 2)), obj);
  EXPECT_EQ(visible_mask(obj, BinaryMask(3, 2, true)).count(), 0u);
  EXPECT_THROW(visible_mask(obj, BinaryMask(2, 3)), ShapeError);
}

TEST(VisibleMask, IdempotentAndMonotone) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    BinaryMask obj(9, 6), occ(9, 6), more(9, 6);
    for (std::size_t i = 0; i < obj.size(); ++i) {
      obj.set_index(i, rng.bernoulli(0.6));
      occ.set_index(i, rng.bernoulli(0.3));
      more.set_index(i, occ[i] || rng.bernoulli(0.2));
    }
    const auto v = visible_mask(obj, occ);
    EXPECT_EQ(visible_mask(v, occ), v);
    const auto w = visible_mask(obj, more);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LE(w[i], v[i]);
  }
}

TEST(MaskRatio, Counts) {
  EXPECT_EQ(mask_ratio(BinaryMask(4, 4)), 0.0);
  EXPECT_EQ(mask_ratio(BinaryMask(4, 4, true)), 1.0);
  EXPECT_EQ(mask_ratio(from_rows({"##..", "#...", "..##", "...#"})), 0.375);
}

TEST(Pgm, RoundTripAndLevels) {
  const auto m = from_rows({"#..", ".#.", "..#", "###"});
  const std::string bytes = encode_pgm(m);
  EXPECT_EQ(bytes.substr(0, 12), "P5\n3 4\n255\n\xff");
  const auto img = decode_pgm(bytes);
  ASSERT_EQ(img.width, 3);
  ASSERT_EQ(img.height, 4);
  EXPECT_EQ(img.levels[0], 255);
  EXPECT_EQ(img.levels[1], 0);
  const auto levels = composite_levels(from_rows({"##", ".."}), from_rows({".#", "#."}));
  EXPECT_EQ(levels, (std::vector<std::uint8_t>{255, 255, 128, 0}));
  EXPECT_THROW(decode_pgm("P2\n1 1\n255\n0"), IoError);
}
