#include <benchmark/benchmark.h>

#include "occlusym/attention.hpp"
#include "occlusym/block.hpp"
#include "occlusym/mask2d.hpp"
#include "occlusym/mesh_occlusion.hpp"
#include "occlusym/metrics.hpp"
#include "occlusym/rng.hpp"

using namespace occlusym;

namespace {

Mat normal(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

PointCloud cloud(Rng& rng, Eigen::Index n) {
  PointCloud c(n, 3);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform();
  return c;
}

void BM_MaskWeightedAttention(benchmark::State& state) {
  Rng rng(1);
  const auto l = state.range(0), k = state.range(1);
  const auto p = make_attention(64, 64, 4, 16, rng);
  const Mat x = normal(rng, l, 64), ctx = normal(rng, k, 64);
  PatchWeightVector w{Vec::Ones(k), 5};
  for (Eigen::Index j = 5; j < k; j += 2) w.values[j] = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(mask_weighted_cross_attention(x, ctx, w, p));
}
BENCHMARK(BM_MaskWeightedAttention)->Args({64, 69})->Args({512, 69})->Args({64, 261});

void BM_AttentionBackward(benchmark::State& state) {
  Rng rng(2);
  const auto p = make_attention(64, 64, 4, 16, rng);
  const Mat x = normal(rng, 64, 64), ctx = normal(rng, 69, 64);
  AttentionCache cache;
  const Mat y = mask_weighted_cross_attention(x, ctx, {Vec::Ones(69), 5}, p, &cache);
  const Mat dy = normal(rng, y.rows(), y.cols());
  for (auto _ : state) {
    AttentionParams g = p;
    g.visit([](const std::string&, Mat& m) { m.setZero(); });
    benchmark::DoNotOptimize(attention_backward(dy, cache, p, g));
  }
}
BENCHMARK(BM_AttentionBackward);

void BM_RandomOcclusion(benchmark::State& state) {
  const OcclusionParams params;
  const int size = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen_random_occlusion(size, size, params, seed++));
}
BENCHMARK(BM_RandomOcclusion)->Arg(128)->Arg(518);

void BM_Rasterize(benchmark::State& state) {
  const auto mesh = normalize_to_unit_cube(make_icosphere(static_cast<int>(state.range(0))));
  const auto cam = orbit_cameras(1, 2.0, 40.0, 30.0, 0.0, 128)[0];
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_ids(mesh, cam));
  state.counters["triangles"] = static_cast<double>(mesh.triangles.size());
}
BENCHMARK(BM_Rasterize)->Arg(2)->Arg(4);

void BM_RandomWalk(benchmark::State& state) {
  const auto mesh = make_icosphere(4);
  const auto adj = build_adjacency(mesh);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(random_walk_select(mesh, adj, 0.5, seed++));
}
BENCHMARK(BM_RandomWalk);

void BM_Chamfer(benchmark::State& state) {
  Rng rng(3);
  const PointCloud a = cloud(rng, state.range(0)), b = cloud(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a, b));
}
BENCHMARK(BM_Chamfer)->Arg(256)->Arg(4096);

void BM_FarthestPointSampling(benchmark::State& state) {
  Rng rng(4);
  const PointCloud c = cloud(rng, 20000);
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_indices(c, state.range(0), 0));
}
BENCHMARK(BM_FarthestPointSampling)->Arg(256)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
