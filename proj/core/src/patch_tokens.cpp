#include "occlusym/patch_tokens.hpp"

#include <cmath>
#include <string>

#include "occlusym/error.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols)
    throw ShapeError(what + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

void TokenGridSpec::validate() const {
  if (image_size <= 0 || patch <= 0 || n_prefix < 0) throw ParameterError("TokenGridSpec: non-positive size");
  if (image_size % patch != 0) throw ParameterError("TokenGridSpec: image_size must be a multiple of patch");
}

int token_count(const TokenGridSpec& spec) {
  spec.validate();
  return spec.n_prefix + spec.patch_tokens();
}

PatchWeightVector patch_fraction(const BinaryMask& mask, const TokenGridSpec& spec) {
  spec.validate();
  if (mask.width() != spec.image_size || mask.height() != spec.image_size)
    throw ShapeError("patch_fraction: mask size does not match the token grid");
  const int g = spec.grid();
  const int p = spec.patch;
  PatchWeightVector out;
  out.n_prefix = spec.n_prefix;
  out.values = Vec::Ones(token_count(spec));
  const double area = static_cast<double>(p) * p;
  for (int gy = 0; gy < g; ++gy)
    for (int gx = 0; gx < g; ++gx) {
      int set = 0;
      for (int y = gy * p; y < (gy + 1) * p; ++y)
        for (int x = gx * p; x < (gx + 1) * p; ++x) set += mask.at(x, y) ? 1 : 0;
      out.values[spec.n_prefix + gy * g + gx] = set / area;
    }
  return out;
}

Image apply_mask(const Image& image, const BinaryMask& mask) {
  if (mask.width() != image.width || mask.height() != image.height)
    throw ShapeError("apply_mask: dimension mismatch");
  Image out = image;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (!mask.at(x, y))
        for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = 0.0;
  return out;
}

PatchEmbedder make_patch_embedder(const TokenGridSpec& spec, int channels, int width, std::uint64_t seed) {
  spec.validate();
  if (channels <= 0 || width <= 0) throw ParameterError("make_patch_embedder: non-positive width");
  PatchEmbedder e;
  e.spec = spec;
  e.channels = channels;
  const int fan_in = spec.patch * spec.patch * channels;
  Rng rng(derive_seed(seed, "patch_embed.projection"));
  e.projection.resize(fan_in, width);
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < e.projection.size(); ++i) e.projection.data()[i] = scale * rng.normal();

  const int g = spec.grid();
  e.positional.resize(static_cast<Eigen::Index>(g) * g, width);
  // Half the channels encode the row, half the column.
  const int half = width / 2;
  for (int gy = 0; gy < g; ++gy)
    for (int gx = 0; gx < g; ++gx)
      for (int c = 0; c < width; ++c) {
        const bool row_axis = c < half;
        const int local = row_axis ? c : c - half;
        const int span = row_axis ? half : width - half;
        const double pos = row_axis ? gy : gx;
        const double freq = std::pow(100.0, -static_cast<double>(local / 2 * 2) / std::max(span, 1));
        const double v = (local % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
        e.positional(gy * g + gx, c) = 0.1 * v;
      }

  Rng prefix_rng(derive_seed(seed, "patch_embed.prefix"));
  e.prefix.resize(spec.n_prefix, width);
  for (Eigen::Index i = 0; i < e.prefix.size(); ++i) e.prefix.data()[i] = prefix_rng.normal();
  return e;
}

Mat embed_patches(const Image& image, const PatchEmbedder& embedder) {
  const auto& spec = embedder.spec;
  spec.validate();
  if (image.width != spec.image_size || image.height != spec.image_size || image.channels != embedder.channels)
    throw ShapeError("embed_patches: image does not match the embedder");
  const int g = spec.grid();
  const int p = spec.patch;
  const int fan_in = p * p * image.channels;
  Mat flat(static_cast<Eigen::Index>(g) * g, fan_in);
  for (int gy = 0; gy < g; ++gy)
    for (int gx = 0; gx < g; ++gx) {
      int k = 0;
      for (int y = gy * p; y < (gy + 1) * p; ++y)
        for (int x = gx * p; x < (gx + 1) * p; ++x)
          for (int c = 0; c < image.channels; ++c) flat(gy * g + gx, k++) = image.at(x, y, c);
    }
  Mat out(spec.n_prefix + g * g, embedder.width());
  out.topRows(spec.n_prefix) = embedder.prefix;
  out.bottomRows(static_cast<Eigen::Index>(g) * g).noalias() = flat * embedder.projection;
  out.bottomRows(static_cast<Eigen::Index>(g) * g) += embedder.positional;
  return out;
}

Mat stack_occlusion_tokens(const PatchWeightVector& w, int width) {
  if (width <= 0) throw ParameterError("stack_occlusion_tokens: width must be positive");
  Mat out(w.size(), width);
  for (Eigen::Index k = 0; k < w.size(); ++k) out.row(k).setConstant(w[k]);
  return out;
}

}  // namespace occlusym
