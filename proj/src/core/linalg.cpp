#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace stoat {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kConditionLimit = 1e12;
constexpr double kRidge = 1e-10;

Eigen::VectorXd column_scales(const Eigen::MatrixXd& m) {
  Eigen::VectorXd scales(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    scales(j) = norm > 0.0 ? norm : 1.0;
  }
  return scales;
}

}  // namespace

std::vector<int> deficient_columns(const Eigen::MatrixXd& matrix) {
  std::vector<int> out;
  if (matrix.cols() == 0) return out;
  const Eigen::VectorXd scales = column_scales(matrix);
  const Eigen::MatrixXd scaled = matrix * scales.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(kRankThreshold);
  const auto rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = rank; k < matrix.cols(); ++k) out.push_back(perm(k));
  std::sort(out.begin(), out.end());
  return out;
}

LeastSquaresFit least_squares(const Eigen::MatrixXd& design,
                              const Eigen::VectorXd& target,
                              std::span<const std::string> column_names,
                              std::string_view context,
                              std::vector<std::string>& warnings) {
  const Eigen::Index p = design.cols();
  require(design.rows() == target.size(), ErrorCode::kInternal,
          std::string(context) + ": design/target row mismatch");
  require(design.rows() >= p, ErrorCode::kInsufficientData,
          std::string(context) + ": fewer rows than columns");

  const Eigen::VectorXd scales = column_scales(design);
  const Eigen::MatrixXd scaled = design * scales.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(kRankThreshold);

  if (qr.rank() < p) {
    std::ostringstream msg;
    msg << context << ": singular normal equations, collinear columns {";
    const auto& perm = qr.colsPermutation().indices();
    std::vector<int> bad;
    for (Eigen::Index k = qr.rank(); k < p; ++k) bad.push_back(perm(k));
    std::sort(bad.begin(), bad.end());
    for (std::size_t k = 0; k < bad.size(); ++k) {
      if (k) msg << ", ";
      const auto idx = static_cast<std::size_t>(bad[k]);
      msg << (idx < column_names.size() ? column_names[idx] : "col" + std::to_string(idx));
    }
    msg << "} (e.g. a constant indicator or an empty treatment group)";
    fail(ErrorCode::kEstimation, msg.str());
  }

  LeastSquaresFit fit;
  const Eigen::MatrixXd xtx = design.transpose() * design;
  const auto r_diag = qr.matrixR().diagonal().cwiseAbs();
  const double condition = p > 0 ? r_diag.maxCoeff() / r_diag.minCoeff() : 1.0;
  if (condition * condition > kConditionLimit * kConditionLimit) {
    const double lambda = kRidge * xtx.diagonal().maxCoeff();
    const Eigen::MatrixXd regularised =
        xtx + lambda * Eigen::MatrixXd::Identity(p, p);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(regularised);
    fit.coef = ldlt.solve(design.transpose() * target);
    fit.xtx_inverse = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    fit.ridge_applied = true;
    std::ostringstream msg;
    msg << context << ": near-singular design (condition ~" << condition
        << "), applied ridge " << lambda;
    warnings.push_back(msg.str());
  } else {
    fit.coef = scales.cwiseInverse().asDiagonal() * qr.solve(target);
    fit.xtx_inverse = xtx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  }
  fit.residuals = target - design * fit.coef;
  return fit;
}

}  // namespace stoat
