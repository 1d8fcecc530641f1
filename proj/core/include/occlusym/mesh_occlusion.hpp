#pragma once

#include <cstdint>
#include <vector>

#include "occlusym/mask2d.hpp"
#include "occlusym/mesh.hpp"
#include "occlusym/raster.hpp"

namespace occlusym {

struct TriangleSelection {
  std::vector<int> selected;  // sorted, unique
  double achieved_ratio = 0.0;  // selected area / total area
  // True when the seed's connected component ran out before reaching the target.
  bool exhausted = false;

  bool contains(int t) const;
};

// Grows one edge-connected region from a random non-degenerate seed triangle.
// Each step adds a uniformly drawn unselected triangle adjacent to the region
// until the selected surface-area fraction reaches `target_ratio`.
TriangleSelection random_walk_select(const TriMesh& mesh, double target_ratio, std::uint64_t seed);
TriangleSelection random_walk_select(const TriMesh& mesh, const Adjacency& adjacency,
                                     double target_ratio, std::uint64_t seed);

struct ViewMasks {
  BinaryMask obj;  // any triangle front-most
  BinaryMask occ;  // front-most triangle is selected
};

ViewMasks render_masks(const TriMesh& mesh, const TriangleSelection& sel, const Camera& cam);
ViewMasks masks_from_ids(const IdBuffer& ids, const TriangleSelection& sel);

}  // namespace occlusym
