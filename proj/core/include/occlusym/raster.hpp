#pragma once

#include <optional>
#include <vector>

#include "occlusym/mask2d.hpp"
#include "occlusym/mesh.hpp"

namespace occlusym {

// Orbit camera looking at the origin, +Z up. Yaw rotates about +Z starting
// from +X; pitch elevates toward +Z.
struct Camera {
  double radius = 2.0;
  double yaw_deg = 0.0;
  double pitch_deg = 30.0;
  double fov_y_deg = 40.0;
  int image_size = 128;

  void validate() const;

  Vec3 position() const;
  // Orthonormal view basis: right, up, forward (toward the origin).
  void basis(Vec3& right, Vec3& up, Vec3& forward) const;
  double near_plane() const { return radius / 100.0; }
  // World-space direction through the center of pixel (px, py), not normalized.
  Vec3 pixel_ray(int px, int py) const;
};

// n cameras with yaw = yaw_start + i * 360 / n.
std::vector<Camera> orbit_cameras(int n, double radius, double fov_y_deg, double pitch_deg,
                                  double yaw_start_deg, int image_size = 128);

// Z-buffered rasterization output. `triangle` holds the front-most triangle id
// per pixel or -1; `depth` is view-space distance along the forward axis
// (infinity where empty).
struct IdBuffer {
  int size = 0;
  std::vector<int> triangle;
  std::vector<float> depth;
};

// Perspective rasterization with pixel-center sampling, the top-left fill
// rule, no back-face culling and a 32-bit float depth test (strict less, so
// the lower triangle id wins exact ties). Triangles with any vertex in front
// of the near plane are dropped.
IdBuffer rasterize_ids(const TriMesh& mesh, const Camera& cam);

}  // namespace occlusym
