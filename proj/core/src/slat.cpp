#include "occlusym/slat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"
#include "occlusym/error.hpp"
#include "occlusym/io.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

using json = nlohmann::ordered_json;

VoxelGrid::VoxelGrid(int n) : n_(n) {
  if (n < 2) throw ParameterError("VoxelGrid: N must be at least 2");
  occ_.assign(static_cast<std::size_t>(n) * n * n, 0);
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(occ_.begin(), occ_.end(), std::uint8_t{1}));
}

std::string to_string(ToyFamily f) {
  switch (f) {
    case ToyFamily::kBox: return "box";
    case ToyFamily::kSphere: return "sphere";
    case ToyFamily::kUnion2: return "union2";
    case ToyFamily::kEll: return "ell";
  }
  return "unknown";
}

ToyFamily toy_family_from_string(std::string_view s) {
  for (auto f : kAllToyFamilies)
    if (to_string(f) == s) return f;
  throw ParameterError("unknown toy family '" + std::string(s) + "'");
}

namespace {

constexpr double kHalfRegion = 0.4;

double draw_if_unset(double v, Rng& rng, double lo, double hi) {
  const double drawn = rng.uniform(lo, hi);
  return v < 0.0 ? drawn : v;
}

}  // namespace

ToyShapeParams resolve_toy_params(ToyFamily family, ToyShapeParams p, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "toy_shape." + to_string(family)));
  // Draws happen unconditionally so explicit values do not shift the stream.
  switch (family) {
    case ToyFamily::kBox:
      p.a = draw_if_unset(p.a, rng, 0.12, 0.38);
      p.c = draw_if_unset(p.c, rng, 0.12, 0.38);
      p.b = 0.0;
      break;
    case ToyFamily::kSphere:
      p.a = draw_if_unset(p.a, rng, 0.15, 0.4);
      p.b = p.c = 0.0;
      break;
    case ToyFamily::kUnion2: {
      p.a = draw_if_unset(p.a, rng, 0.15, 0.35);
      p.c = draw_if_unset(p.c, rng, 0.06, 0.15);
      const double b_hi = std::min(0.3, 2.0 * kHalfRegion - 2.0 * p.c);
      p.b = draw_if_unset(p.b, rng, 0.1, std::max(0.1, b_hi));
      break;
    }
    case ToyFamily::kEll:
      p.c = draw_if_unset(p.c, rng, 0.25, 0.4);
      p.a = draw_if_unset(p.a, rng, 0.06, 0.12);
      p.b = draw_if_unset(p.b, rng, 0.12, 0.35);
      break;
  }
  auto bad = [](double v) { return !(v >= 0.0) || v > kHalfRegion; };
  if (bad(p.a) || bad(p.b) || bad(p.c)) throw ParameterError("toy shape dimensions must lie in [0, 0.4]");
  if (family == ToyFamily::kUnion2 &&
      std::max(-kHalfRegion + 2.0 * p.c, -kHalfRegion + p.b) + p.b > kHalfRegion + 1e-12)
    throw ParameterError("union2: sphere leaves the central region");
  if (family == ToyFamily::kEll && 2.0 * p.a > 2.0 * p.c)
    throw ParameterError("ell: arm thickness exceeds the profile size");
  return p;
}

bool toy_contains(ToyFamily family, const ToyShapeParams& p, double x, double y, double z) {
  switch (family) {
    case ToyFamily::kBox:
      return std::abs(x) <= p.a && std::abs(y) <= p.a && std::abs(z) <= p.c;
    case ToyFamily::kSphere:
      return x * x + y * y + z * z < p.a * p.a;
    case ToyFamily::kUnion2: {
      const double base_z = -kHalfRegion + p.c;
      if (std::abs(x) <= p.a && std::abs(y) <= p.a && std::abs(z - base_z) <= p.c) return true;
      // Sphere centered on the box top, lifted when it would poke out below.
      const double top = std::max(-kHalfRegion + 2.0 * p.c, -kHalfRegion + p.b);
      const double dz = z - top;
      return x * x + y * y + dz * dz < p.b * p.b;
    }
    case ToyFamily::kEll: {
      if (std::abs(y) > p.b || std::abs(x) > p.c || std::abs(z) > p.c) return false;
      return x <= -p.c + 2.0 * p.a || z <= -p.c + 2.0 * p.a;
    }
  }
  return false;
}

VoxelGrid gen_toy_shape(ToyFamily family, const ToyShapeParams& params, int n, std::uint64_t seed) {
  if (n < 8) throw ParameterError("gen_toy_shape: N must be at least 8");
  const ToyShapeParams p = resolve_toy_params(family, params, seed);
  VoxelGrid g(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (toy_contains(family, p, g.center(x), g.center(y), g.center(z))) g.set(x, y, z);
  return g;
}

int dense_feature_count(int n, int r, int sub_block) {
  if (r <= 0 || sub_block <= 0 || n % r != 0 || (n / r) % sub_block != 0)
    throw ShapeError("dense latent: N must be divisible by r and the cell by sub_block");
  const int per_axis = n / r / sub_block;
  return per_axis * per_axis * per_axis;
}

DenseLatent encode_stage1(const VoxelGrid& grid, int r, int sub_block) {
  const int n = grid.n();
  const int features = dense_feature_count(n, r, sub_block);
  DenseLatent lat;
  lat.n = n;
  lat.r = r;
  lat.sub_block = sub_block;
  lat.tokens = Mat::Zero(static_cast<Eigen::Index>(r) * r * r, features);
  const int cell = n / r;
  const int per_axis = cell / sub_block;
  const double inv = 1.0 / (static_cast<double>(sub_block) * sub_block * sub_block);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        if (!grid.at(x, y, z)) continue;
        const int token = ((x / cell) * r + y / cell) * r + z / cell;
        const int sx = (x % cell) / sub_block;
        const int sy = (y % cell) / sub_block;
        const int sz = (z % cell) / sub_block;
        lat.tokens(token, (sx * per_axis + sy) * per_axis + sz) += inv;
      }
  return lat;
}

VoxelGrid decode_stage1(const DenseLatent& lat, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("decode_stage1: threshold must lie in (0, 1)");
  const int features = dense_feature_count(lat.n, lat.r, lat.sub_block);
  require_shape(lat.tokens, static_cast<Eigen::Index>(lat.r) * lat.r * lat.r, features, "decode_stage1 tokens");
  VoxelGrid g(lat.n);
  const int cell = lat.cell();
  const int per_axis = cell / lat.sub_block;
  for (int x = 0; x < lat.n; ++x)
    for (int y = 0; y < lat.n; ++y)
      for (int z = 0; z < lat.n; ++z) {
        const int token = ((x / cell) * lat.r + y / cell) * lat.r + z / cell;
        const int f = (((x % cell) / lat.sub_block) * per_axis + (y % cell) / lat.sub_block) * per_axis +
                      (z % cell) / lat.sub_block;
        if (lat.tokens(token, f) >= threshold) g.set(x, y, z);
      }
  return g;
}

namespace {
constexpr int kFaceDirs[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
}  // namespace

std::vector<VoxelPos> active_voxels(const VoxelGrid& grid) {
  std::vector<VoxelPos> out;
  const int n = grid.n();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        if (!grid.at(x, y, z)) continue;
        for (const auto& d : kFaceDirs)
          if (!grid.occupied(x + d[0], y + d[1], z + d[2])) {
            out.push_back({x, y, z});
            break;
          }
      }
  return out;
}

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b) {
  if (a.n() != b.n()) throw ShapeError("voxel_iou: grids differ in resolution");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool u = a.data()[i] != 0;
    const bool v = b.data()[i] != 0;
    inter += (u && v) ? 1 : 0;
    uni += (u || v) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void SparseLatent::validate() const {
  if (features.rows() != static_cast<Eigen::Index>(positions.size()))
    throw ShapeError("SparseLatent: feature rows != position count");
  if (positions.size() > static_cast<std::size_t>(n) * n * n) throw ShapeError("SparseLatent: more entries than voxels");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (int c : positions[i])
      if (c < 0 || c >= n) throw ShapeError("SparseLatent: position out of range");
    if (i > 0 && !(positions[i - 1] < positions[i]))
      throw ShapeError("SparseLatent: positions must be strictly increasing");
  }
  if (!features.allFinite()) throw NumericError("SparseLatent: non-finite feature");
}

SparseLatent make_sparse_latent(const VoxelGrid& grid) {
  SparseLatent lat;
  lat.n = grid.n();
  lat.positions = active_voxels(grid);
  lat.features.resize(static_cast<Eigen::Index>(lat.positions.size()), 8);
  for (std::size_t i = 0; i < lat.positions.size(); ++i) {
    const auto& p = lat.positions[i];
    int n6 = 0, n18 = 0, n26 = 0;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
          if (manhattan == 0 || !grid.occupied(p[0] + dx, p[1] + dy, p[2] + dz)) continue;
          n26 += 1;
          if (manhattan <= 2) n18 += 1;
          if (manhattan == 1) n6 += 1;
        }
    const double x = grid.center(p[0]), y = grid.center(p[1]), z = grid.center(p[2]);
    lat.features.row(static_cast<Eigen::Index>(i)) << x, y, z, n6 / 6.0, n18 / 18.0, n26 / 26.0,
        std::sqrt(x * x + y * y + z * z), 1.0;
  }
  return lat;
}

TriMesh voxel_surface_mesh(const VoxelGrid& grid) {
  TriMesh mesh;
  const int n = grid.n();
  std::map<std::array<int, 3>, int> lattice;
  auto vertex = [&](int i, int j, int k) {
    const std::array<int, 3> key{i, j, k};
    auto it = lattice.find(key);
    if (it != lattice.end()) return it->second;
    mesh.vertices.emplace_back(static_cast<double>(i) / n - 0.5, static_cast<double>(j) / n - 0.5,
                               static_cast<double>(k) / n - 0.5);
    const int id = static_cast<int>(mesh.vertices.size()) - 1;
    lattice.emplace(key, id);
    return id;
  };
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        if (!grid.at(x, y, z)) continue;
        for (int f = 0; f < 6; ++f) {
          const auto& d = kFaceDirs[f];
          if (grid.occupied(x + d[0], y + d[1], z + d[2])) continue;
          const int axis = f / 2;
          const int plane = (f % 2 == 0) ? 0 : 1;
          // Corners of the face in the two in-plane axes.
          std::array<int, 4> ids{};
          const int u_axis = (axis + 1) % 3;
          const int v_axis = (axis + 2) % 3;
          const int corners[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
          for (int c = 0; c < 4; ++c) {
            std::array<int, 3> p{x, y, z};
            p[axis] += plane;
            p[u_axis] += corners[c][0];
            p[v_axis] += corners[c][1];
            ids[c] = vertex(p[0], p[1], p[2]);
          }
          mesh.triangles.push_back({ids[0], ids[1], ids[2]});
          mesh.triangles.push_back({ids[0], ids[2], ids[3]});
        }
      }
  return mesh;
}

std::string encode_voxels(const VoxelGrid& grid) {
  json header = {{"format", "occlusym-voxels"}, {"version", 1}, {"N", grid.n()},
                 {"order", "x-major"}, {"bit_order", "lsb-first"}};
  std::string out = header.dump() + "\n";
  std::string packed((grid.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.data()[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
  return out + packed;
}

VoxelGrid decode_voxels(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw IoError("voxels: missing header line");
  json header;
  try {
    header = json::parse(bytes.substr(0, nl));
  } catch (const json::exception& e) {
    throw IoError(std::string("voxels: bad header: ") + e.what());
  }
  if (header.value("format", "") != "occlusym-voxels" || header.value("order", "") != "x-major")
    throw IoError("voxels: unsupported header");
  VoxelGrid g(header.at("N").get<int>());
  const auto payload = bytes.substr(nl + 1);
  if (payload.size() != (g.size() + 7) / 8) throw IoError("voxels: payload size mismatch");
  const int n = g.n();
  std::size_t i = 0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z, ++i)
        if ((static_cast<unsigned char>(payload[i / 8]) >> (i % 8)) & 1) g.set(x, y, z);
  return g;
}

void write_voxels(const std::filesystem::path& path, const VoxelGrid& grid) {
  write_file_atomic(path, encode_voxels(grid));
}

VoxelGrid read_voxels(const std::filesystem::path& path) { return decode_voxels(read_file(path)); }

std::string encode_sparse_latent(const SparseLatent& lat) {
  lat.validate();
  std::string out;
  for (std::size_t i = 0; i < lat.positions.size(); ++i) {
    json row;
    row["p"] = lat.positions[i];
    std::vector<double> z(static_cast<std::size_t>(lat.features.cols()));
    for (Eigen::Index c = 0; c < lat.features.cols(); ++c) z[static_cast<std::size_t>(c)] = lat.features(static_cast<Eigen::Index>(i), c);
    row["z"] = z;
    out += row.dump() + "\n";
  }
  return out;
}

SparseLatent decode_sparse_latent(std::string_view text, int n) {
  SparseLatent lat;
  lat.n = n;
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json row = json::parse(line);
    lat.positions.push_back(row.at("p").get<VoxelPos>());
    rows.push_back(row.at("z").get<std::vector<double>>());
  }
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  lat.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) throw ShapeError("sparse latent: ragged feature rows");
    for (std::size_t c = 0; c < width; ++c) lat.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  lat.validate();
  return lat;
}

}  // namespace occlusym
