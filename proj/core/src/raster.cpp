#include "occlusym/raster.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "occlusym/error.hpp"

namespace occlusym {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct ScreenVertex {
  double x, y;  // pixel coordinates, y down
  double z;     // view depth
};

double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Inward normal of a->b is (-(b.y-a.y), b.x-a.x) once the triangle has
// positive area. Left edges (normal.x > 0) and top edges (horizontal with the
// interior below, normal.y > 0) own their boundary pixels.
bool owns_boundary(const ScreenVertex& a, const ScreenVertex& b) {
  const double nx = -(b.y - a.y);
  const double ny = b.x - a.x;
  return nx > 0.0 || (nx == 0.0 && ny > 0.0);
}

}  // namespace

void Camera::validate() const {
  if (!(radius > 0.0)) throw ParameterError("Camera: radius must be positive");
  if (!(fov_y_deg > 0.0 && fov_y_deg < 180.0)) throw ParameterError("Camera: fov_y must lie in (0, 180)");
  if (image_size <= 0) throw ParameterError("Camera: image_size must be positive");
}

Vec3 Camera::position() const {
  const double yaw = yaw_deg * kDeg;
  const double pitch = pitch_deg * kDeg;
  return radius * Vec3(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch));
}

void Camera::basis(Vec3& right, Vec3& up, Vec3& forward) const {
  forward = (-position()).normalized();
  Vec3 world_up(0, 0, 1);
  Vec3 r = forward.cross(world_up);
  if (r.norm() < 1e-9) r = forward.cross(Vec3(0, 1, 0));
  right = r.normalized();
  up = right.cross(forward);
}

Vec3 Camera::pixel_ray(int px, int py) const {
  Vec3 right, up, forward;
  basis(right, up, forward);
  const double tan_half = std::tan(0.5 * fov_y_deg * kDeg);
  const double ndc_x = 2.0 * (px + 0.5) / image_size - 1.0;
  const double ndc_y = 1.0 - 2.0 * (py + 0.5) / image_size;
  return forward + ndc_x * tan_half * right + ndc_y * tan_half * up;
}

std::vector<Camera> orbit_cameras(int n, double radius, double fov_y_deg, double pitch_deg,
                                  double yaw_start_deg, int image_size) {
  if (n < 1) throw ParameterError("orbit_cameras: n must be at least 1");
  std::vector<Camera> cams;
  cams.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Camera c;
    c.radius = radius;
    c.fov_y_deg = fov_y_deg;
    c.pitch_deg = pitch_deg;
    c.yaw_deg = yaw_start_deg + 360.0 * i / n;
    c.image_size = image_size;
    c.validate();
    cams.push_back(c);
  }
  return cams;
}

IdBuffer rasterize_ids(const TriMesh& mesh, const Camera& cam) {
  mesh.validate();
  cam.validate();
  const int size = cam.image_size;
  IdBuffer buf;
  buf.size = size;
  buf.triangle.assign(static_cast<std::size_t>(size) * size, -1);
  buf.depth.assign(static_cast<std::size_t>(size) * size, std::numeric_limits<float>::infinity());

  Vec3 right, up, forward;
  cam.basis(right, up, forward);
  const Vec3 eye = cam.position();
  const double tan_half = std::tan(0.5 * cam.fov_y_deg * kDeg);
  const double near = cam.near_plane();

  std::vector<ScreenVertex> projected(mesh.vertices.size());
  std::vector<bool> in_front(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 v = mesh.vertices[i] - eye;
    const double z = v.dot(forward);
    in_front[i] = z >= near;
    if (!in_front[i]) continue;
    const double ndc_x = v.dot(right) / (z * tan_half);
    const double ndc_y = v.dot(up) / (z * tan_half);
    projected[i] = {0.5 * (ndc_x + 1.0) * size, 0.5 * (1.0 - ndc_y) * size, z};
  }

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[t];
    if (!in_front[tri[0]] || !in_front[tri[1]] || !in_front[tri[2]]) continue;
    ScreenVertex v0 = projected[tri[0]];
    ScreenVertex v1 = projected[tri[1]];
    ScreenVertex v2 = projected[tri[2]];
    double area = edge(v0, v1, v2.x, v2.y);
    if (area == 0.0) continue;
    if (area < 0.0) {
      std::swap(v1, v2);
      area = -area;
    }
    const bool own0 = owns_boundary(v1, v2);
    const bool own1 = owns_boundary(v2, v0);
    const bool own2 = owns_boundary(v0, v1);

    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min({v0.x, v1.x, v2.x}) - 0.5)));
    const int x_hi = std::min(size - 1, static_cast<int>(std::ceil(std::max({v0.x, v1.x, v2.x}) - 0.5)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min({v0.y, v1.y, v2.y}) - 0.5)));
    const int y_hi = std::min(size - 1, static_cast<int>(std::ceil(std::max({v0.y, v1.y, v2.y}) - 0.5)));

    for (int py = y_lo; py <= y_hi; ++py) {
      const double cy = py + 0.5;
      for (int px = x_lo; px <= x_hi; ++px) {
        const double cx = px + 0.5;
        const double w0 = edge(v1, v2, cx, cy);
        const double w1 = edge(v2, v0, cx, cy);
        const double w2 = edge(v0, v1, cx, cy);
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        if ((w0 == 0.0 && !own0) || (w1 == 0.0 && !own1) || (w2 == 0.0 && !own2)) continue;
        // Perspective-correct depth: 1/z is affine in screen space.
        const double inv_z = (w0 / v0.z + w1 / v1.z + w2 / v2.z) / area;
        const float z = static_cast<float>(1.0 / inv_z);
        const std::size_t idx = static_cast<std::size_t>(py) * size + px;
        if (z < buf.depth[idx]) {
          buf.depth[idx] = z;
          buf.triangle[idx] = t;
        }
      }
    }
  }
  return buf;
}

}  // namespace occlusym
