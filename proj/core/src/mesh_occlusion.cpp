#include "occlusym/mesh_occlusion.hpp"

#include <algorithm>

#include "occlusym/error.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

bool TriangleSelection::contains(int t) const {
  return std::binary_search(selected.begin(), selected.end(), t);
}

TriangleSelection random_walk_select(const TriMesh& mesh, double target_ratio, std::uint64_t seed) {
  return random_walk_select(mesh, build_adjacency(mesh), target_ratio, seed);
}

TriangleSelection random_walk_select(const TriMesh& mesh, const Adjacency& adjacency,
                                     double target_ratio, std::uint64_t seed) {
  mesh.validate();
  if (!(target_ratio > 0.0 && target_ratio < 1.0))
    throw ParameterError("random_walk_select: target_ratio must lie in (0, 1)");
  if (adjacency.size() != mesh.triangles.size())
    throw ShapeError("random_walk_select: adjacency does not match mesh");

  const std::size_t n = mesh.triangles.size();
  std::vector<double> area(n);
  std::vector<int> seeds;
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    area[t] = mesh.triangle_area(t);
    total += area[t];
    if (area[t] > 0.0) seeds.push_back(static_cast<int>(t));
  }
  if (seeds.empty()) throw ParameterError("random_walk_select: mesh has no non-degenerate triangle");

  Rng rng(seed);
  std::vector<std::uint8_t> state(n, 0);  // 0 free, 1 frontier, 2 selected
  std::vector<int> frontier;
  auto select = [&](int t) {
    state[t] = 2;
    for (int nb : adjacency[t])
      if (state[nb] == 0) {
        state[nb] = 1;
        frontier.push_back(nb);
      }
  };

  const int start = seeds[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(seeds.size()) - 1))];
  select(start);
  double acc = area[start];
  while (acc / total < target_ratio && !frontier.empty()) {
    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(frontier.size()) - 1));
    const int t = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    select(t);
    acc += area[t];
  }

  TriangleSelection sel;
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t)
    if (state[t] == 2) {
      sel.selected.push_back(static_cast<int>(t));
      sum += area[t];
    }
  sel.achieved_ratio = sum / total;
  sel.exhausted = acc / total < target_ratio;
  return sel;
}

ViewMasks masks_from_ids(const IdBuffer& ids, const TriangleSelection& sel) {
  ViewMasks out{BinaryMask(ids.size, ids.size), BinaryMask(ids.size, ids.size)};
  for (std::size_t i = 0; i < ids.triangle.size(); ++i) {
    const int t = ids.triangle[i];
    if (t < 0) continue;
    out.obj.set_index(i, true);
    if (sel.contains(t)) out.occ.set_index(i, true);
  }
  return out;
}

ViewMasks render_masks(const TriMesh& mesh, const TriangleSelection& sel, const Camera& cam) {
  return masks_from_ids(rasterize_ids(mesh, cam), sel);
}

}  // namespace occlusym
