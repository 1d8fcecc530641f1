#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "occlusym/mesh.hpp"
#include "occlusym/tensor.hpp"

namespace occlusym {

// N^3 occupancy, x-major: index = (x * N + y) * N + z.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  explicit VoxelGrid(int n);

  int n() const { return n_; }
  std::size_t size() const { return occ_.size(); }
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(x) * n_ + y) * n_ + z;
  }
  bool in_bounds(int x, int y, int z) const { return x >= 0 && y >= 0 && z >= 0 && x < n_ && y < n_ && z < n_; }
  bool at(int x, int y, int z) const { return occ_[index(x, y, z)] != 0; }
  // Out-of-range cells read as empty.
  bool occupied(int x, int y, int z) const { return in_bounds(x, y, z) && at(x, y, z); }
  void set(int x, int y, int z, bool v = true) { occ_[index(x, y, z)] = v ? 1 : 0; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& data() const { return occ_; }

  // Center of voxel i along an axis in unit-cube coordinates [-0.5, 0.5].
  double center(int i) const { return (i + 0.5) / n_ - 0.5; }

  bool operator==(const VoxelGrid&) const = default;

 private:
  int n_ = 0;
  std::vector<std::uint8_t> occ_;
};

enum class ToyFamily { kBox, kSphere, kUnion2, kEll };

std::string to_string(ToyFamily f);
ToyFamily toy_family_from_string(std::string_view s);
inline constexpr std::array<ToyFamily, 4> kAllToyFamilies = {ToyFamily::kBox, ToyFamily::kSphere,
                                                             ToyFamily::kUnion2, ToyFamily::kEll};

// Shape dimensions in unit-cube coordinates. Negative entries are drawn from
// the seed. Meaning per family:
//   box:    a = half-extent in x and y, c = half-extent in z
//   sphere: a = radius
//   union2: box (half-extents a, a, c) resting on z = -0.4 with a sphere of
//           radius b centered on its top face (raised to z = -0.4 + b when
//           it would otherwise reach below the floor)
//   ell:    L profile in the x-z plane spanning [-c, c]^2 with arm
//           half-thickness a, extruded over y in [-b, b]
// Every solid must stay inside the central 80% of the cube, |coord| <= 0.4.
struct ToyShapeParams {
  double a = -1.0;
  double b = -1.0;
  double c = -1.0;
};

// Concrete parameters after drawing the unset entries for `seed`.
ToyShapeParams resolve_toy_params(ToyFamily family, ToyShapeParams params, std::uint64_t seed);
bool toy_contains(ToyFamily family, const ToyShapeParams& resolved, double x, double y, double z);

// Filled solid sampled at voxel centers. Requires n >= 8.
VoxelGrid gen_toy_shape(ToyFamily family, const ToyShapeParams& params, int n, std::uint64_t seed);

// Stage-1 dense latent: r^3 tokens, one per cell of (n/r)^3 voxels; each
// token lists the occupancy fractions of the cell's sub-blocks of
// sub_block^3 voxels in x-major order.
struct DenseLatent {
  int n = 0;
  int r = 0;
  int sub_block = 1;
  Mat tokens;  // r^3 x ((n/r)/sub_block)^3

  int cell() const { return n / r; }
  int features() const { return static_cast<int>(tokens.cols()); }
};

int dense_feature_count(int n, int r, int sub_block = 1);
DenseLatent encode_stage1(const VoxelGrid& grid, int r, int sub_block = 1);
// A voxel is occupied iff its sub-block fraction >= threshold.
VoxelGrid decode_stage1(const DenseLatent& latent, double threshold);

using VoxelPos = std::array<int, 3>;

// Occupied voxels with an empty (or out-of-grid) 6-neighbour, x-major order.
std::vector<VoxelPos> active_voxels(const VoxelGrid& grid);

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b);

// Stage-2 structured latent: sorted, unique positions with a feature vector each.
struct SparseLatent {
  int n = 0;
  std::vector<VoxelPos> positions;
  Mat features;  // L x C

  void validate() const;
};

// Occupancy-derived per-voxel features for the active voxels (width 8):
// unit-cube position, 6/18/26-neighbourhood occupancy fractions, radial
// distance and a constant 1.
SparseLatent make_sparse_latent(const VoxelGrid& grid);

// Exposed voxel faces as a closed triangle mesh in unit-cube coordinates with
// shared lattice vertices.
TriMesh voxel_surface_mesh(const VoxelGrid& grid);

// One JSON header line, then ceil(N^3 / 8) bytes, LSB-first.
std::string encode_voxels(const VoxelGrid& grid);
VoxelGrid decode_voxels(std::string_view bytes);
void write_voxels(const std::filesystem::path& path, const VoxelGrid& grid);
VoxelGrid read_voxels(const std::filesystem::path& path);

// JSON lines {"p":[x,y,z],"z":[...]}.
std::string encode_sparse_latent(const SparseLatent& latent);
SparseLatent decode_sparse_latent(std::string_view text, int n);

}  // namespace occlusym
