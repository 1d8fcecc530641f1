#include "occlusym/mask2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "occlusym/error.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

BinaryMask::BinaryMask(int width, int height, bool value) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ParameterError("BinaryMask: dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& other) {
  if (other.width_ != width_ || other.height_ != height_) throw ShapeError("mask OR: dimension mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

namespace {

void check_range(const IntRange& r, const char* name) {
  if (r.lo < 0 || r.lo > r.hi) throw ParameterError(std::string("OcclusionParams: bad count range ") + name);
}

void check_range(const RealRange& r, const char* name) {
  if (!(r.lo >= 0.0) || r.lo > r.hi || r.hi > 0.5)
    throw ParameterError(std::string("OcclusionParams: bad size range ") + name);
}

}  // namespace

void OcclusionParams::validate() const {
  check_range(n_lines, "n_lines");
  check_range(n_circles, "n_circles");
  check_range(n_ellipses, "n_ellipses");
  check_range(n_rects, "n_rects");
  check_range(line_length, "line_length");
  check_range(line_thickness, "line_thickness");
  check_range(circle_radius, "circle_radius");
  check_range(ellipse_semi_axis, "ellipse_semi_axis");
  check_range(rect_side, "rect_side");
}

int OcclusionParams::effective_dilation(int width, int height) const {
  if (dilation_radius >= 0) return dilation_radius;
  const int short_side = std::min(width, height);
  return static_cast<int>(std::lround(4.0 * short_side / 512.0));
}

std::vector<OcclusionShape> sample_occlusion_shapes(int width, int height,
                                                    const OcclusionParams& params,
                                                    std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw ParameterError("gen_random_occlusion: dimensions must be positive");
  params.validate();

  Rng rng(seed);
  const double side = std::min(width, height);
  const double w = width;
  const double h = height;
  auto draw = [&](const RealRange& r) { return side * rng.uniform(r.lo, r.hi); };

  std::vector<OcclusionShape> shapes;
  const auto n_lines = rng.uniform_int(params.n_lines.lo, params.n_lines.hi);
  const auto n_circles = rng.uniform_int(params.n_circles.lo, params.n_circles.hi);
  const auto n_ellipses = rng.uniform_int(params.n_ellipses.lo, params.n_ellipses.hi);
  const auto n_rects = rng.uniform_int(params.n_rects.lo, params.n_rects.hi);

  for (std::int64_t i = 0; i < n_lines; ++i) {
    LineShape s{};
    s.x0 = rng.uniform(0.0, w);
    s.y0 = rng.uniform(0.0, h);
    const double len = draw(params.line_length);
    const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    s.x1 = s.x0 + len * std::cos(dir);
    s.y1 = s.y0 + len * std::sin(dir);
    s.thickness = std::max(1.0, draw(params.line_thickness));
    shapes.emplace_back(s);
  }
  for (std::int64_t i = 0; i < n_circles; ++i) {
    CircleShape s{};
    s.cx = rng.uniform(0.0, w);
    s.cy = rng.uniform(0.0, h);
    s.radius = draw(params.circle_radius);
    shapes.emplace_back(s);
  }
  for (std::int64_t i = 0; i < n_ellipses; ++i) {
    EllipseShape s{};
    s.cx = rng.uniform(0.0, w);
    s.cy = rng.uniform(0.0, h);
    s.semi_a = draw(params.ellipse_semi_axis);
    s.semi_b = draw(params.ellipse_semi_axis);
    s.angle = rng.uniform(0.0, std::numbers::pi);
    shapes.emplace_back(s);
  }
  const int dilation = params.effective_dilation(width, height);
  for (std::int64_t i = 0; i < n_rects; ++i) {
    RectShape s{};
    s.x0 = rng.uniform(0.0, w);
    s.y0 = rng.uniform(0.0, h);
    s.x1 = s.x0 + draw(params.rect_side);
    s.y1 = s.y0 + draw(params.rect_side);
    s.dilation = dilation;
    shapes.emplace_back(s);
  }
  return shapes;
}

namespace {

template <typename Inside>
BinaryMask rasterize(int width, int height, Inside&& inside) {
  BinaryMask m(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (inside(x + 0.5, y + 0.5)) m.set(x, y);
  return m;
}

struct ShapeRasterizer {
  int width;
  int height;

  BinaryMask operator()(const LineShape& s) const {
    const double dx = s.x1 - s.x0;
    const double dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    const double r2 = 0.25 * s.thickness * s.thickness;
    return rasterize(width, height, [&](double px, double py) {
      double t = len2 > 0.0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = px - (s.x0 + t * dx);
      const double ey = py - (s.y0 + t * dy);
      return ex * ex + ey * ey <= r2;
    });
  }

  BinaryMask operator()(const CircleShape& s) const {
    return rasterize(width, height, [&](double px, double py) {
      const double dx = px - s.cx;
      const double dy = py - s.cy;
      return dx * dx + dy * dy <= s.radius * s.radius;
    });
  }

  BinaryMask operator()(const EllipseShape& s) const {
    const double c = std::cos(s.angle);
    const double sn = std::sin(s.angle);
    return rasterize(width, height, [&](double px, double py) {
      if (s.semi_a <= 0.0 || s.semi_b <= 0.0) return false;
      const double dx = px - s.cx;
      const double dy = py - s.cy;
      const double u = (c * dx + sn * dy) / s.semi_a;
      const double v = (-sn * dx + c * dy) / s.semi_b;
      return u * u + v * v <= 1.0;
    });
  }

  BinaryMask operator()(const RectShape& s) const {
    BinaryMask m = rasterize(width, height, [&](double px, double py) {
      return px >= s.x0 && px < s.x1 && py >= s.y0 && py < s.y1;
    });
    return dilate_square(m, s.dilation);
  }
};

}  // namespace

BinaryMask rasterize_shape(const OcclusionShape& shape, int width, int height) {
  if (width <= 0 || height <= 0) throw ParameterError("rasterize_shape: dimensions must be positive");
  return std::visit(ShapeRasterizer{width, height}, shape);
}

BinaryMask gen_random_occlusion(int width, int height, const OcclusionParams& params,
                                std::uint64_t seed) {
  const auto shapes = sample_occlusion_shapes(width, height, params, seed);
  BinaryMask out(width, height);
  for (const auto& s : shapes) out |= rasterize_shape(s, width, height);
  return out;
}

BinaryMask visible_mask(const BinaryMask& obj, const BinaryMask& occ) {
  if (obj.width() != occ.width() || obj.height() != occ.height())
    throw ShapeError("visible_mask: obj and occ dimensions differ");
  BinaryMask out(obj.width(), obj.height());
  for (std::size_t i = 0; i < obj.size(); ++i) out.set_index(i, obj[i] && !occ[i]);
  return out;
}

double mask_ratio(const BinaryMask& mask) {
  if (mask.size() == 0) return 0.0;
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

BinaryMask dilate_square(const BinaryMask& mask, int radius) {
  if (radius < 0) throw ParameterError("dilate_square: negative radius");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  // Separable: horizontal max then vertical max.
  BinaryMask horiz(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) horiz.set(xx, y);
    }
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!horiz.at(x, y)) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) out.set(x, yy);
    }
  return out;
}

}  // namespace occlusym
