#pragma once

#include <Eigen/Dense>

namespace skelchaos {

/// Dense row-major storage; rows of a trajectory matrix are time steps.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace skelchaos
