#include "occlusym/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "occlusym/error.hpp"
#include "occlusym/parallel.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

void validate_cloud(const PointCloud& cloud, const char* what) {
  if (cloud.rows() == 0) throw ParameterError(std::string(what) + ": empty point cloud");
  if (!cloud.allFinite()) throw ParameterError(std::string(what) + ": non-finite coordinate");
}

KdTree::KdTree(const PointCloud& points, int leaf_size) : points_(points) {
  validate_cloud(points, "KdTree");
  order_.resize(static_cast<std::size_t>(points.rows()));
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * order_.size() / static_cast<std::size_t>(std::max(leaf_size, 1)) + 2);
  build(0, static_cast<int>(order_.size()), std::max(leaf_size, 1));
}

int KdTree::build(int begin, int end, int leaf_size) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= leaf_size) return id;

  Eigen::RowVector3d lo = points_.row(order_[begin]);
  Eigen::RowVector3d hi = lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.row(order_[i]));
    hi = hi.cwiseMax(points_.row(order_[i]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_(a, axis) < points_(b, axis); });
  const double split = points_(order_[mid], axis);
  const int left = build(begin, mid, leaf_size);
  const int right = build(mid, end, leaf_size);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node_id, const PointCloud& queries, Eigen::Index q, double& best,
                    Eigen::Index& best_index) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const Eigen::Index p = order_[static_cast<std::size_t>(i)];
      const double d = squared_distance(queries, q, points_, p);
      if (d < best || (d == best && p < best_index)) {
        best = d;
        best_index = p;
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = queries(q, node.axis) - node.split;
  const int near = diff <= 0.0 ? node.left : node.right;
  const int far = diff <= 0.0 ? node.right : node.left;
  search(near, queries, q, best, best_index);
  if (diff * diff <= best) search(far, queries, q, best, best_index);
}

double KdTree::nearest(const PointCloud& queries, Eigen::Index q, Eigen::Index* index) const {
  double best = std::numeric_limits<double>::infinity();
  Eigen::Index best_index = std::numeric_limits<Eigen::Index>::max();
  search(0, queries, q, best, best_index);
  if (index) *index = best_index;
  return best;
}

namespace {

double mean_nearest(const PointCloud& from, const PointCloud& to) {
  const KdTree tree(to);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < from.rows(); ++i) sum += tree.nearest(from, i);
  return sum / static_cast<double>(from.rows());
}

void check_lists(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref) {
  if (gen.empty() || ref.empty()) throw ParameterError("metric: empty cloud list");
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  validate_cloud(a, "chamfer");
  validate_cloud(b, "chamfer");
  return mean_nearest(a, b) + mean_nearest(b, a);
}

std::vector<std::vector<double>> chamfer_matrix(const std::vector<PointCloud>& gen,
                                                const std::vector<PointCloud>& ref, int jobs) {
  check_lists(gen, ref);
  std::vector<std::vector<double>> d(gen.size(), std::vector<double>(ref.size()));
  const std::size_t cols = ref.size();
  parallel_for(gen.size() * cols, jobs, [&](std::size_t k) { d[k / cols][k % cols] = chamfer(gen[k / cols], ref[k % cols]); });
  return d;
}

double mmd_from_matrix(const std::vector<std::vector<double>>& d) {
  if (d.empty() || d.front().empty()) throw ParameterError("mmd: empty distance matrix");
  double sum = 0.0;
  for (std::size_t j = 0; j < d.front().size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : d) best = std::min(best, row[j]);
    sum += best;
  }
  return sum / static_cast<double>(d.front().size());
}

double coverage_from_matrix(const std::vector<std::vector<double>>& d) {
  if (d.empty() || d.front().empty()) throw ParameterError("coverage: empty distance matrix");
  std::vector<bool> matched(d.front().size(), false);
  for (const auto& row : d) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] < row[best]) best = j;
    matched[best] = true;
  }
  return static_cast<double>(std::count(matched.begin(), matched.end(), true)) / static_cast<double>(matched.size());
}

double mmd(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref) {
  return mmd_from_matrix(chamfer_matrix(gen, ref));
}

double coverage(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref) {
  return coverage_from_matrix(chamfer_matrix(gen, ref));
}

std::vector<Eigen::Index> farthest_point_indices(const PointCloud& cloud, Eigen::Index k, Eigen::Index start) {
  validate_cloud(cloud, "farthest_point_sampling");
  const Eigen::Index n = cloud.rows();
  if (k < 1 || k > n) throw ParameterError("farthest_point_sampling: k must lie in [1, n]");
  if (start < 0 || start >= n) throw ParameterError("farthest_point_sampling: start index out of range");
  std::vector<Eigen::Index> picked{start};
  std::vector<double> min_d(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  taken[static_cast<std::size_t>(start)] = true;
  Eigen::Index last = start;
  while (static_cast<Eigen::Index>(picked.size()) < k) {
    Eigen::Index best = -1;
    double best_d = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& m = min_d[static_cast<std::size_t>(i)];
      m = std::min(m, squared_distance(cloud, i, cloud, last));
      if (!taken[static_cast<std::size_t>(i)] && m > best_d) {
        best_d = m;
        best = i;
      }
    }
    picked.push_back(best);
    taken[static_cast<std::size_t>(best)] = true;
    last = best;
  }
  return picked;
}

PointCloud farthest_point_sampling(const PointCloud& cloud, Eigen::Index k, std::uint64_t seed) {
  validate_cloud(cloud, "farthest_point_sampling");
  Rng rng(derive_seed(seed, "fps.start"));
  const auto start = static_cast<Eigen::Index>(rng.uniform_int(0, cloud.rows() - 1));
  const auto idx = farthest_point_indices(cloud, k, start);
  PointCloud out(static_cast<Eigen::Index>(idx.size()), 3);
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = cloud.row(idx[i]);
  return out;
}

PointCloud voxels_to_points(const VoxelGrid& grid) {
  const auto active = active_voxels(grid);
  if (active.empty()) throw ParameterError("voxels_to_points: grid has no surface voxels");
  PointCloud pts(static_cast<Eigen::Index>(active.size()), 3);
  const double inv = 1.0 / grid.n();
  for (std::size_t i = 0; i < active.size(); ++i)
    for (int a = 0; a < 3; ++a) pts(static_cast<Eigen::Index>(i), a) = (active[i][static_cast<std::size_t>(a)] + 0.5) * inv;
  return pts;
}

}  // namespace occlusym
