#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panel.hpp"
#include "spatial.hpp"

namespace stoat {

struct DesignOptions {
  bool include_spatial = true;     // false: drop the spatial-lag column
  bool include_covariates = true;  // false: drop the gamma columns
};

// Stacked spatial difference-in-differences regression. Rows are ordered
// region-major over periods t = 1..T-1; columns are
// [spatial_lag(t-1), 1, T_i, Post_t, T_i*Post_t, c_1..c_D], with the first
// and last blocks present according to DesignOptions.
struct DesignMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd target;
  std::vector<std::string> columns;
  bool has_lag = true;
  std::size_t num_covariates = 0;
  std::vector<std::size_t> row_region;
  std::vector<std::size_t> row_time;

  Eigen::Index exogenous_offset() const { return has_lag ? 1 : 0; }
};

DesignMatrix build_design_matrix(const Panel& panel, const SpatialMatrix& s,
                                 DesignOptions options = {});

enum class InstrumentSet {
  // Spatially lagged covariates S c(t-1) plus second-order lag S^2 y(t-2).
  kSpatial,
  // The lag column instruments itself (declares it exogenous); reduces to OLS.
  kSelf,
};

struct IvEstimate {
  double rho = 0.0;
  double std_error = 0.0;
  std::size_t observations = 0;
  double first_stage_r2 = 0.0;
};

// Two-stage least squares estimate of the spatial autoregressive coefficient.
IvEstimate estimate_rho_iv(const DesignMatrix& design, const SpatialMatrix& s,
                           const Panel& panel,
                           InstrumentSet instruments = InstrumentSet::kSpatial);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct DidEstimate {
  double rho = 0.0;
  double rho_se = 0.0;
  bool spatial = true;
  double beta0 = 0.0, beta1 = 0.0, beta2 = 0.0, delta = 0.0;
  double beta0_se = 0.0, beta1_se = 0.0, beta2_se = 0.0, delta_se = 0.0;
  std::vector<std::string> covariate_names;
  Eigen::VectorXd gamma;
  Eigen::VectorXd gamma_se;
  double residual_variance = 0.0;
  std::size_t observations = 0;
  std::vector<std::string> warnings;

  // Canonical order: rho, beta0, beta1, beta2, delta, gamma_<name>...
  std::vector<Coefficient> coefficients() const;
};

// OLS of (target - rho_hat * lag) on the remaining columns, classical
// homoskedastic standard errors.
DidEstimate estimate_ols_given_rho(const DesignMatrix& design, double rho_hat,
                                   double rho_se = 0.0);

struct EstimationOptions {
  DesignOptions design;
  InstrumentSet instruments = InstrumentSet::kSpatial;
};

// Full two-stage fit: IV for rho (skipped when the spatial term is ablated),
// then OLS for the rest.
DidEstimate estimate_did(const Panel& panel, const SpatialMatrix& s,
                         EstimationOptions options = {});

struct AdjustedPanel {
  Eigen::MatrixXd y_tilde;
  Eigen::MatrixXd z;
};

// y - delta * T_i * Post_t.
Eigen::MatrixXd causal_adjust(const Panel& panel, const DidEstimate& estimate);

// y_tilde + rho * S y_tilde, contemporaneous lag.
Eigen::MatrixXd build_adjusted_input(const Eigen::MatrixXd& y_tilde, const SpatialMatrix& s,
                                     double rho_hat);

AdjustedPanel adjust_panel(const Panel& panel, const SpatialMatrix& s,
                           const DidEstimate& estimate);

struct ParameterReport {
  std::string spillover;      // "strong" | "weak" | "negative"
  std::string intervention;   // "effective" | "limited effectiveness" | "counterproductive"
  bool delta_significant = false;
  std::vector<std::pair<std::string, std::string>> covariate_effects;  // name -> direction

  std::vector<std::pair<std::string, std::string>> key_values(const DidEstimate& est) const;
};

ParameterReport report_parameters(const DidEstimate& estimate);
std::string format_report(const DidEstimate& estimate);

enum class TargetTransformKind { kNone, kStandardize, kLog1pStandardize };

TargetTransformKind parse_target_transform(const std::string& name);
std::string target_transform_name(TargetTransformKind kind);

// Per-region target preprocessing fitted over the conditioning range.
struct TargetTransform {
  TargetTransformKind kind = TargetTransformKind::kNone;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static TargetTransform fit(TargetTransformKind kind, const Eigen::MatrixXd& y,
                             std::size_t fit_length);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& y) const;
  double inverse(std::size_t region, double value) const;
};

}  // namespace stoat
