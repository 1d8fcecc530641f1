#pragma once

#include <cstdint>
#include <vector>

#include "occlusym/mask2d.hpp"
#include "occlusym/tensor.hpp"

namespace occlusym {

// Square image split into patch x patch tiles, preceded by n_prefix global
// tokens (one CLS plus registers in the reference layout).
struct TokenGridSpec {
  int image_size = 518;
  int patch = 14;
  int n_prefix = 5;

  void validate() const;
  int grid() const { return image_size / patch; }
  int patch_tokens() const { return grid() * grid(); }
};

int token_count(const TokenGridSpec& spec);

// Per-token weights in [0, 1]; the first n_prefix entries are 1.
struct PatchWeightVector {
  Vec values;
  int n_prefix = 0;

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
};

// Fraction of set pixels inside each patch, row-major patch order, prefixed
// with n_prefix ones.
PatchWeightVector patch_fraction(const BinaryMask& mask, const TokenGridSpec& spec);

// Interleaved row-major raster with `channels` values per pixel.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c = 1) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0.0) {}
  double& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

// Pixel-wise product with a binary mask (x * M_vis).
Image apply_mask(const Image& image, const BinaryMask& mask);

// Fixed patch embedder: flattened patch pixels -> projection -> + positional
// code. Prefix tokens are fixed vectors.
struct PatchEmbedder {
  TokenGridSpec spec;
  int channels = 1;
  Mat projection;  // (patch^2 * channels) x width
  Mat positional;  // grid^2 x width
  Mat prefix;      // n_prefix x width

  int width() const { return static_cast<int>(projection.cols()); }

  template <typename F>
  void visit(F&& f) {
    f("projection", projection);
    f("positional", positional);
    f("prefix", prefix);
  }
};

// Seeded Gaussian projection scaled by 1/sqrt(fan_in), 2D sinusoidal
// positional codes and seeded prefix vectors.
PatchEmbedder make_patch_embedder(const TokenGridSpec& spec, int channels, int width, std::uint64_t seed);

// Rows: prefix tokens, then one token per patch in row-major order.
Mat embed_patches(const Image& image, const PatchEmbedder& embedder);

// Row k is w[k] repeated `width` times.
Mat stack_occlusion_tokens(const PatchWeightVector& w, int width);

}  // namespace occlusym
