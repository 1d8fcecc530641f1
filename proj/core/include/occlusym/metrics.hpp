#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "occlusym/slat.hpp"

namespace occlusym {

using PointCloud = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

void validate_cloud(const PointCloud& cloud, const char* what);

// Squared Euclidean distance, evaluated as dx*dx + dy*dy + dz*dz.
inline double squared_distance(const PointCloud& a, Eigen::Index i, const PointCloud& b, Eigen::Index j) {
  const double dx = a(i, 0) - b(j, 0);
  const double dy = a(i, 1) - b(j, 1);
  const double dz = a(i, 2) - b(j, 2);
  return dx * dx + dy * dy + dz * dz;
}

// Exact nearest-neighbour index over a fixed cloud.
class KdTree {
 public:
  explicit KdTree(const PointCloud& points, int leaf_size = 8);

  // Squared distance to the nearest point; `index` receives the lowest index
  // among equidistant nearest points.
  double nearest(const PointCloud& queries, Eigen::Index q, Eigen::Index* index = nullptr) const;

 private:
  struct Node {
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;
  };
  int build(int begin, int end, int leaf_size);
  void search(int node, const PointCloud& queries, Eigen::Index q, double& best, Eigen::Index& best_index) const;

  const PointCloud& points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// mean_a min_b |a - b|^2 + mean_b min_a |a - b|^2
double chamfer(const PointCloud& a, const PointCloud& b);

// D[i][j] = chamfer(gen[i], ref[j]).
std::vector<std::vector<double>> chamfer_matrix(const std::vector<PointCloud>& gen,
                                                const std::vector<PointCloud>& ref, int jobs = 1);

// Mean over references of the smallest Chamfer distance to any generated cloud.
double mmd(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref);
double mmd_from_matrix(const std::vector<std::vector<double>>& d);

// Fraction of references that are the nearest reference (lowest index on
// ties) of at least one generated cloud.
double coverage(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref);
double coverage_from_matrix(const std::vector<std::vector<double>>& d);

// Greedy max-min selection starting at `start`; ties go to the lowest index.
std::vector<Eigen::Index> farthest_point_indices(const PointCloud& cloud, Eigen::Index k, Eigen::Index start);
// Start point drawn from the seed.
PointCloud farthest_point_sampling(const PointCloud& cloud, Eigen::Index k, std::uint64_t seed);

// Centers of active voxels in [0, 1]^3: ((i + 0.5) / N, ...).
PointCloud voxels_to_points(const VoxelGrid& grid);

// ASCII PLY with float x, y, z vertex properties.
std::string encode_ply(const PointCloud& cloud);
PointCloud decode_ply(std::string_view text);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace occlusym
