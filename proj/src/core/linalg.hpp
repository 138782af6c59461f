#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace stoat {

struct LeastSquaresFit {
  Eigen::VectorXd coef;
  // (X'X)^{-1}, ridge-regularised when `ridge_applied` is set.
  Eigen::MatrixXd xtx_inverse;
  Eigen::VectorXd residuals;
  bool ridge_applied = false;
};

// Pivoted-QR least squares on a column-equilibrated copy of `design`.
// Exact rank deficiency throws ErrorCode::kEstimation naming the offending
// columns; near-singular systems fall back to a 1e-10 ridge and append a
// warning.
LeastSquaresFit least_squares(const Eigen::MatrixXd& design,
                              const Eigen::VectorXd& target,
                              std::span<const std::string> column_names,
                              std::string_view context,
                              std::vector<std::string>& warnings);

// Columns of `matrix` that are linearly dependent on the others, in pivot
// order. Empty when the matrix has full column rank.
std::vector<int> deficient_columns(const Eigen::MatrixXd& matrix);

}  // namespace stoat
