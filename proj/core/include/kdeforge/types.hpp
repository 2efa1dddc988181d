#pragma once

#include <Eigen/Core>

namespace kdeforge {

using Point = Eigen::VectorXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;
using Matrix = Eigen::MatrixXd;

/// n×d matrix, one observation (or grid point) per row. Row-major so each
/// point is contiguous and binds to PointRef without a copy.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace kdeforge
