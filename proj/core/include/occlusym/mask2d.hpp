#pragma once

#include <cstdint>
#include <variant>
#include <vector>

namespace occlusym {

// Row-major binary raster. Each element is exactly 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool value = false);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set_index(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

  std::size_t count() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  BinaryMask& operator|=(const BinaryMask& other);

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Random occluder layout. Size ranges are fractions of the shorter raster
// side; every maximum is capped at 0.5.
struct OcclusionParams {
  IntRange n_lines{1, 3};
  IntRange n_circles{1, 3};
  IntRange n_ellipses{1, 3};
  IntRange n_rects{3, 7};
  // Square structuring-element radius in pixels applied to every rectangle.
  // Negative selects the resolution-scaled default round(4 * short_side / 512).
  int dilation_radius = -1;

  RealRange line_length{0.1, 0.5};
  RealRange line_thickness{0.02, 0.06};
  RealRange circle_radius{0.03, 0.15};
  RealRange ellipse_semi_axis{0.03, 0.2};
  RealRange rect_side{0.05, 0.25};

  void validate() const;
  int effective_dilation(int width, int height) const;
};

struct LineShape {
  double x0, y0, x1, y1;
  double thickness;
};

struct CircleShape {
  double cx, cy, radius;
};

struct EllipseShape {
  double cx, cy;
  double semi_a, semi_b;
  double angle;  // radians, rotation of the a-axis from +x
};

// Half-open continuous box [x0, x1) x [y0, y1), dilated by `dilation` pixels
// after rasterization.
struct RectShape {
  double x0, y0, x1, y1;
  int dilation;
};

using OcclusionShape = std::variant<LineShape, CircleShape, EllipseShape, RectShape>;

// The shapes gen_random_occlusion draws for (width, height, params, seed), in
// drawing order: lines, circles, ellipses, then rectangles.
std::vector<OcclusionShape> sample_occlusion_shapes(int width, int height,
                                                    const OcclusionParams& params,
                                                    std::uint64_t seed);

// Pixel-center rasterization of a single shape; rectangles include dilation.
BinaryMask rasterize_shape(const OcclusionShape& shape, int width, int height);

BinaryMask gen_random_occlusion(int width, int height, const OcclusionParams& params,
                                std::uint64_t seed);

// obj AND NOT occ.
BinaryMask visible_mask(const BinaryMask& obj, const BinaryMask& occ);

double mask_ratio(const BinaryMask& mask);

// Morphological dilation with a (2r+1) x (2r+1) square element.
BinaryMask dilate_square(const BinaryMask& mask, int radius);

}  // namespace occlusym
