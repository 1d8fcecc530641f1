#include "oracles.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <set>

namespace oracle {

using occlusym::Vec3;

namespace {

bool inside(const occlusym::OcclusionShape& shape, double px, double py, int width, int height) {
  if (const auto* s = std::get_if<occlusym::LineShape>(&shape)) {
    const double dx = s->x1 - s->x0, dy = s->y1 - s->y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - s->x0) * dx + (py - s->y0) * dy) / len2 : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    const double ex = px - (s->x0 + t * dx), ey = py - (s->y0 + t * dy);
    return ex * ex + ey * ey <= 0.25 * s->thickness * s->thickness;
  }
  if (const auto* s = std::get_if<occlusym::CircleShape>(&shape)) {
    const double dx = px - s->cx, dy = py - s->cy;
    return dx * dx + dy * dy <= s->radius * s->radius;
  }
  if (const auto* s = std::get_if<occlusym::EllipseShape>(&shape)) {
    if (s->semi_a <= 0.0 || s->semi_b <= 0.0) return false;
    const double c = std::cos(s->angle), sn = std::sin(s->angle);
    const double dx = px - s->cx, dy = py - s->cy;
    const double u = (c * dx + sn * dy) / s->semi_a;
    const double v = (-sn * dx + c * dy) / s->semi_b;
    return u * u + v * v <= 1.0;
  }
  const auto& r = std::get<occlusym::RectShape>(shape);
  const int x = static_cast<int>(px), y = static_cast<int>(py);
  for (int yy = y - r.dilation; yy <= y + r.dilation; ++yy)
    for (int xx = x - r.dilation; xx <= x + r.dilation; ++xx) {
      if (xx < 0 || yy < 0 || xx >= width || yy >= height) continue;
      const double cx = xx + 0.5, cy = yy + 0.5;
      if (cx >= r.x0 && cx < r.x1 && cy >= r.y0 && cy < r.y1) return true;
    }
  return false;
}

}  // namespace

BinaryMask union_of_shapes(const std::vector<occlusym::OcclusionShape>& shapes, int width, int height) {
  BinaryMask m(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (const auto& s : shapes)
        if (inside(s, x + 0.5, y + 0.5, width, height)) {
          m.set(x, y);
          break;
        }
  return m;
}

std::vector<int> raycast_ids(const occlusym::TriMesh& mesh, const occlusym::Camera& cam) {
  const double deg = std::numbers::pi / 180.0;
  const double cp = std::cos(cam.pitch_deg * deg), sp = std::sin(cam.pitch_deg * deg);
  const double cy = std::cos(cam.yaw_deg * deg), sy = std::sin(cam.yaw_deg * deg);
  const Vec3 eye = cam.radius * Vec3(cp * cy, cp * sy, sp);
  // Look-at basis with +Z up; forward points at the origin.
  const Vec3 fwd = -eye / eye.norm();
  const Vec3 right = Vec3(fwd.y(), -fwd.x(), 0.0).normalized();
  const Vec3 up = right.cross(fwd);
  const double th = std::tan(0.5 * cam.fov_y_deg * deg);
  const double near = cam.radius / 100.0;
  const int s = cam.image_size;

  std::vector<int> ids(static_cast<std::size_t>(s) * s, -1);
  for (int py = 0; py < s; ++py)
    for (int px = 0; px < s; ++px) {
      const double u = (2.0 * (px + 0.5) / s - 1.0) * th;
      const double v = (1.0 - 2.0 * (py + 0.5) / s) * th;
      const Vec3 dir = fwd + u * right + v * up;  // unit depth along fwd
      double best = std::numeric_limits<double>::infinity();
      int hit = -1;
      for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec3& a = mesh.vertices[tri[0]];
        const Vec3 e1 = mesh.vertices[tri[1]] - a, e2 = mesh.vertices[tri[2]] - a;
        const Vec3 p = dir.cross(e2);
        const double det = e1.dot(p);
        if (std::abs(det) < 1e-14) continue;
        const Vec3 o = eye - a;
        const double bu = o.dot(p) / det;
        if (bu < 0.0 || bu > 1.0) continue;
        const Vec3 q = o.cross(e1);
        const double bv = dir.dot(q) / det;
        if (bv < 0.0 || bu + bv > 1.0) continue;
        const double depth = e2.dot(q) / det;
        if (depth > near && depth < best) {
          best = depth;
          hit = static_cast<int>(t);
        }
      }
      ids[static_cast<std::size_t>(py) * s + px] = hit;
    }
  return ids;
}

bool edge_connected(const occlusym::TriMesh& mesh, const std::vector<int>& tris) {
  if (tris.empty()) return true;
  const std::set<int> wanted(tris.begin(), tris.end());
  std::map<std::pair<int, int>, std::vector<int>> by_edge;
  for (int t : wanted) {
    const auto& f = mesh.triangles[static_cast<std::size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      by_edge[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  std::set<int> seen{*wanted.begin()};
  std::queue<int> todo;
  todo.push(*wanted.begin());
  while (!todo.empty()) {
    const int t = todo.front();
    todo.pop();
    const auto& f = mesh.triangles[static_cast<std::size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      for (int n : by_edge[{std::min(a, b), std::max(a, b)}])
        if (seen.insert(n).second) todo.push(n);
    }
  }
  return seen.size() == wanted.size();
}

namespace {

double one_way(const occlusym::PointCloud& a, const occlusym::PointCloud& b) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double dx = a(i, 0) - b(j, 0), dy = a(i, 1) - b(j, 1), dz = a(i, 2) - b(j, 2);
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    sum += best;
  }
  return sum / static_cast<double>(a.rows());
}

}  // namespace

double chamfer(const occlusym::PointCloud& a, const occlusym::PointCloud& b) { return one_way(a, b) + one_way(b, a); }

double mmd(const std::vector<occlusym::PointCloud>& gen, const std::vector<occlusym::PointCloud>& ref) {
  double sum = 0.0;
  for (const auto& r : ref) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gen) best = std::min(best, chamfer(g, r));
    sum += best;
  }
  return sum / static_cast<double>(ref.size());
}

double coverage(const std::vector<occlusym::PointCloud>& gen, const std::vector<occlusym::PointCloud>& ref) {
  std::set<std::size_t> hit;
  for (const auto& g : gen) {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const double d = chamfer(g, ref[j]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    hit.insert(arg);
  }
  return static_cast<double>(hit.size()) / static_cast<double>(ref.size());
}

double min_pairwise(const occlusym::PointCloud& cloud, const std::vector<Eigen::Index>& idx) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j)
      best = std::min(best, (cloud.row(idx[i]) - cloud.row(idx[j])).norm());
  return best;
}

Mat weighted_attention_rows(const Mat& scores, const occlusym::Vec& w) {
  Mat out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    long double z = 0.0L;
    for (Eigen::Index k = 0; k < scores.cols(); ++k) z += static_cast<long double>(w(k)) * std::exp(static_cast<long double>(scores(i, k)));
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
      out(i, j) = static_cast<double>(static_cast<long double>(w(j)) * std::exp(static_cast<long double>(scores(i, j))) / z);
  }
  return out;
}

GradReport gradient_check(const std::function<double()>& f, const std::vector<GradTarget>& targets, double step,
                          double floor) {
  double diff2 = 0.0, sum2 = 0.0, worst = -1.0;
  GradReport report;
  for (const auto& t : targets) {
    for (Eigen::Index i = 0; i < t.value->size(); ++i) {
      double& x = t.value->data()[i];
      const double keep = x;
      x = keep + step;
      const double up = f();
      x = keep - step;
      const double down = f();
      x = keep;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = t.analytic->data()[i];
      const double d = analytic - numeric;
      diff2 += d * d;
      sum2 += (std::abs(analytic) + std::abs(numeric)) * (std::abs(analytic) + std::abs(numeric));
      if (std::abs(d) > worst) {
        worst = std::abs(d);
        report.worst = t.name;
      }
    }
  }
  report.rel_error = std::sqrt(diff2) / std::max(std::sqrt(sum2), floor);
  return report;
}

}  // namespace oracle
