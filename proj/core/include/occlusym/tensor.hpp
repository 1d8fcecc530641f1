#pragma once

#include <Eigen/Core>
#include <string>

namespace occlusym {

// Token matrices are row-major: one token per row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

inline bool all_finite(const Mat& m) { return m.allFinite(); }

void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const std::string& what);

}  // namespace occlusym
