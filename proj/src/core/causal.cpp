#include "causal.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"
#include "linalg.hpp"

namespace stoat {

namespace {

constexpr double kDeltaEffectiveThreshold = -0.1;
constexpr double kStrongSpilloverThreshold = 0.3;

void check_alignment(const Panel& panel, const SpatialMatrix& s) {
  require(panel.n() == s.n(), ErrorCode::kInvalidInput,
          "panel has " + std::to_string(panel.n()) + " regions, spatial matrix has " +
              std::to_string(s.n()));
  for (std::size_t i = 0; i < panel.n(); ++i)
    require(panel.region_ids[i] == s.region_ids()[i], ErrorCode::kInvalidInput,
            "region order differs between panel and spatial matrix at '" +
                panel.region_ids[i] + "'");
}

double se_from(double sigma2, const Eigen::MatrixXd& inv, Eigen::Index k) {
  return std::sqrt(std::max(0.0, sigma2 * inv(k, k)));
}

}  // namespace

DesignMatrix build_design_matrix(const Panel& panel, const SpatialMatrix& s,
                                 DesignOptions options) {
  require(panel.t() >= 2, ErrorCode::kInsufficientData,
          "design matrix needs T >= 2, got " + std::to_string(panel.t()));
  check_alignment(panel, s);

  DesignMatrix dm;
  dm.has_lag = options.include_spatial;
  dm.num_covariates = options.include_covariates ? panel.d() : 0;
  if (dm.has_lag) dm.columns.emplace_back("rho");
  for (const char* name : {"beta0", "beta1", "beta2", "delta"}) dm.columns.emplace_back(name);
  for (std::size_t k = 0; k < dm.num_covariates; ++k)
    dm.columns.push_back("gamma_" + panel.covariate_names[k]);

  const std::size_t n = panel.n();
  const std::size_t t = panel.t();
  const auto rows = static_cast<Eigen::Index>(n * (t - 1));
  const auto cols = static_cast<Eigen::Index>(dm.columns.size());
  dm.x.resize(rows, cols);
  dm.target.resize(rows);
  dm.row_region.reserve(static_cast<std::size_t>(rows));
  dm.row_time.reserve(static_cast<std::size_t>(rows));

  const Eigen::MatrixXd lag = dm.has_lag ? spatial_lag(s, panel.y) : Eigen::MatrixXd();
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t tt = 1; tt < t; ++tt, ++r) {
      const auto ti = static_cast<Eigen::Index>(tt);
      Eigen::Index c = 0;
      if (dm.has_lag) dm.x(r, c++) = lag(ii, ti - 1);
      const double treated = panel.treated[i];
      const double post = panel.post[tt];
      dm.x(r, c++) = 1.0;
      dm.x(r, c++) = treated;
      dm.x(r, c++) = post;
      dm.x(r, c++) = treated * post;
      for (std::size_t k = 0; k < dm.num_covariates; ++k) dm.x(r, c++) = panel.covariates[k](ii, ti);
      dm.target(r) = panel.y(ii, ti);
      dm.row_region.push_back(i);
      dm.row_time.push_back(tt);
    }
  }
  return dm;
}

IvEstimate estimate_rho_iv(const DesignMatrix& design, const SpatialMatrix& s,
                           const Panel& panel, InstrumentSet instruments) {
  require(design.has_lag, ErrorCode::kInvalidInput,
          "estimate_rho_iv: design has no spatial-lag column");
  check_alignment(panel, s);
  const Eigen::Index exog_cols = design.x.cols() - 1;

  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < design.x.rows(); ++r)
    if (instruments == InstrumentSet::kSelf || design.row_time[static_cast<std::size_t>(r)] >= 2)
      rows.push_back(r);
  const auto m = static_cast<Eigen::Index>(rows.size());

  std::vector<std::string> inst_names;
  std::vector<Eigen::MatrixXd> inst_sources;  // N x T planes sampled at (i, t - lag)
  std::vector<int> inst_lags;
  if (instruments == InstrumentSet::kSpatial) {
    for (std::size_t k = 0; k < design.num_covariates; ++k) {
      inst_names.push_back("S*" + panel.covariate_names[k] + "(t-1)");
      inst_sources.push_back(spatial_lag(s, panel.covariates[k]));
      inst_lags.push_back(1);
    }
    inst_names.emplace_back("S^2*y(t-2)");
    inst_sources.push_back(spatial_lag(s, spatial_lag(s, panel.y)));
    inst_lags.push_back(2);
  } else {
    inst_names.emplace_back("spatial_lag");
  }

  const auto n_inst = static_cast<Eigen::Index>(inst_names.size());
  Eigen::MatrixXd z(m, n_inst + exog_cols);
  Eigen::MatrixXd xs(m, design.x.cols());
  Eigen::VectorXd ys(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index r = rows[static_cast<std::size_t>(k)];
    const auto i = static_cast<Eigen::Index>(design.row_region[static_cast<std::size_t>(r)]);
    const auto t = static_cast<Eigen::Index>(design.row_time[static_cast<std::size_t>(r)]);
    if (instruments == InstrumentSet::kSpatial) {
      for (Eigen::Index q = 0; q < n_inst; ++q)
        z(k, q) = inst_sources[static_cast<std::size_t>(q)](i, t - inst_lags[static_cast<std::size_t>(q)]);
    } else {
      z(k, 0) = design.x(r, 0);
    }
    z.row(k).tail(exog_cols) = design.x.row(r).tail(exog_cols);
    xs.row(k) = design.x.row(r);
    ys(k) = design.target(r);
  }

  std::vector<std::string> z_names = inst_names;
  for (Eigen::Index c = 1; c < design.x.cols(); ++c)
    z_names.push_back(design.columns[static_cast<std::size_t>(c)]);
  const auto bad = deficient_columns(z);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "rank-deficient instrument matrix, dependent columns {";
    for (std::size_t k = 0; k < bad.size(); ++k)
      msg << (k ? ", " : "") << z_names[static_cast<std::size_t>(bad[k])];
    msg << "}";
    fail(ErrorCode::kEstimation, msg.str());
  }

  std::vector<std::string> scratch;
  const Eigen::VectorXd lag = xs.col(0);
  const auto first = least_squares(z, lag, z_names, "IV first stage", scratch);
  const Eigen::VectorXd lag_hat = lag - first.residuals;

  Eigen::MatrixXd x_hat = xs;
  x_hat.col(0) = lag_hat;
  const auto second = least_squares(x_hat, ys, design.columns, "IV second stage", scratch);

  IvEstimate out;
  out.rho = second.coef(0);
  out.observations = static_cast<std::size_t>(m);
  const Eigen::VectorXd structural_resid = ys - xs * second.coef;
  const double dof = static_cast<double>(m - xs.cols());
  const double sigma2 = dof > 0 ? structural_resid.squaredNorm() / dof : 0.0;
  out.std_error = se_from(sigma2, second.xtx_inverse, 0);
  const double centered = (lag.array() - lag.mean()).square().sum();
  out.first_stage_r2 = centered > 0 ? 1.0 - first.residuals.squaredNorm() / centered : 1.0;

  if (!std::isfinite(out.rho) || std::abs(out.rho) >= 1.0) {
    std::ostringstream msg;
    msg << "nonstationary spatial autoregression: |rho_hat| = " << std::abs(out.rho)
        << " >= 1";
    fail(ErrorCode::kNonstationary, msg.str());
  }
  return out;
}

std::vector<Coefficient> DidEstimate::coefficients() const {
  std::vector<Coefficient> out{{"rho", rho, rho_se},
                               {"beta0", beta0, beta0_se},
                               {"beta1", beta1, beta1_se},
                               {"beta2", beta2, beta2_se},
                               {"delta", delta, delta_se}};
  for (Eigen::Index k = 0; k < gamma.size(); ++k)
    out.push_back({"gamma_" + covariate_names[static_cast<std::size_t>(k)], gamma(k),
                   gamma_se(k)});
  return out;
}

DidEstimate estimate_ols_given_rho(const DesignMatrix& design, double rho_hat,
                                   double rho_se) {
  const Eigen::Index off = design.exogenous_offset();
  const Eigen::Index p = design.x.cols() - off;
  Eigen::VectorXd lhs = design.target;
  if (design.has_lag) lhs -= rho_hat * design.x.col(0);
  const Eigen::MatrixXd exog = design.x.rightCols(p);
  const std::vector<std::string> names(design.columns.begin() + off, design.columns.end());

  DidEstimate est;
  const auto fit = least_squares(exog, lhs, names, "OLS given rho", est.warnings);
  const double dof = static_cast<double>(design.x.rows() - design.x.cols());
  require(dof > 0, ErrorCode::kInsufficientData, "OLS given rho: no residual degrees of freedom");
  est.residual_variance = fit.residuals.squaredNorm() / dof;
  est.observations = static_cast<std::size_t>(design.x.rows());
  est.spatial = design.has_lag;
  est.rho = design.has_lag ? rho_hat : 0.0;
  est.rho_se = design.has_lag ? rho_se : 0.0;

  const double s2 = est.residual_variance;
  est.beta0 = fit.coef(0);
  est.beta1 = fit.coef(1);
  est.beta2 = fit.coef(2);
  est.delta = fit.coef(3);
  est.beta0_se = se_from(s2, fit.xtx_inverse, 0);
  est.beta1_se = se_from(s2, fit.xtx_inverse, 1);
  est.beta2_se = se_from(s2, fit.xtx_inverse, 2);
  est.delta_se = se_from(s2, fit.xtx_inverse, 3);
  const auto d = static_cast<Eigen::Index>(design.num_covariates);
  est.gamma = fit.coef.tail(d);
  est.gamma_se.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) est.gamma_se(k) = se_from(s2, fit.xtx_inverse, 4 + k);
  for (Eigen::Index k = 0; k < d; ++k)
    est.covariate_names.push_back(design.columns[static_cast<std::size_t>(off + 4 + k)].substr(6));
  return est;
}

DidEstimate estimate_did(const Panel& panel, const SpatialMatrix& s,
                         EstimationOptions options) {
  const auto design = build_design_matrix(panel, s, options.design);
  if (!design.has_lag) return estimate_ols_given_rho(design, 0.0, 0.0);
  const auto iv = estimate_rho_iv(design, s, panel, options.instruments);
  return estimate_ols_given_rho(design, iv.rho, iv.std_error);
}

Eigen::MatrixXd causal_adjust(const Panel& panel, const DidEstimate& estimate) {
  Eigen::MatrixXd out = panel.y;
  for (std::size_t i = 0; i < panel.n(); ++i) {
    if (!panel.treated[i]) continue;
    for (std::size_t t = 0; t < panel.t(); ++t)
      if (panel.post[t])
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) -= estimate.delta;
  }
  return out;
}

Eigen::MatrixXd build_adjusted_input(const Eigen::MatrixXd& y_tilde, const SpatialMatrix& s,
                                     double rho_hat) {
  return y_tilde + rho_hat * spatial_lag(s, y_tilde);
}

AdjustedPanel adjust_panel(const Panel& panel, const SpatialMatrix& s,
                           const DidEstimate& estimate) {
  check_alignment(panel, s);
  AdjustedPanel out;
  out.y_tilde = causal_adjust(panel, estimate);
  out.z = build_adjusted_input(out.y_tilde, s, estimate.rho);
  return out;
}

ParameterReport report_parameters(const DidEstimate& est) {
  ParameterReport rep;
  if (est.rho > kStrongSpilloverThreshold)
    rep.spillover = "strong";
  else if (est.rho < 0.0)
    rep.spillover = "negative";
  else
    rep.spillover = "weak";

  if (est.delta < kDeltaEffectiveThreshold)
    rep.intervention = "effective";
  else if (est.delta > -kDeltaEffectiveThreshold)
    rep.intervention = "counterproductive";
  else
    rep.intervention = "limited effectiveness";
  rep.delta_significant = est.delta_se > 0 && std::abs(est.delta / est.delta_se) > 1.96;

  for (Eigen::Index k = 0; k < est.gamma.size(); ++k) {
    const double g = est.gamma(k);
    rep.covariate_effects.emplace_back(est.covariate_names[static_cast<std::size_t>(k)],
                                       g > 0 ? "increases target" : g < 0 ? "decreases target"
                                                                          : "no effect");
  }
  return rep;
}

std::vector<std::pair<std::string, std::string>> ParameterReport::key_values(
    const DidEstimate& est) const {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& c : est.coefficients()) {
    kv.emplace_back(c.name, num(c.estimate));
    kv.emplace_back(c.name + "_se", num(c.std_error));
  }
  kv.emplace_back("residual_variance", num(est.residual_variance));
  kv.emplace_back("observations", std::to_string(est.observations));
  kv.emplace_back("spatial_term", est.spatial ? "on" : "ablated");
  kv.emplace_back("spillover", spillover);
  kv.emplace_back("intervention", intervention);
  kv.emplace_back("delta_significant", delta_significant ? "yes" : "no");
  for (const auto& [name, dir] : covariate_effects) kv.emplace_back("effect_" + name, dir);
  return kv;
}

std::string format_report(const DidEstimate& estimate) {
  const auto rep = report_parameters(estimate);
  std::ostringstream os;
  for (const auto& [k, v] : rep.key_values(estimate)) os << k << '=' << v << '\n';
  for (const auto& w : estimate.warnings) os << "warning=" << w << '\n';
  return os.str();
}

TargetTransformKind parse_target_transform(const std::string& name) {
  if (name == "none") return TargetTransformKind::kNone;
  if (name == "standardize") return TargetTransformKind::kStandardize;
  if (name == "log1p_standardize") return TargetTransformKind::kLog1pStandardize;
  fail(ErrorCode::kInvalidInput, "unknown target_transform '" + name + "'");
}

std::string target_transform_name(TargetTransformKind kind) {
  switch (kind) {
    case TargetTransformKind::kNone: return "none";
    case TargetTransformKind::kStandardize: return "standardize";
    case TargetTransformKind::kLog1pStandardize: return "log1p_standardize";
  }
  return "none";
}

TargetTransform TargetTransform::fit(TargetTransformKind kind, const Eigen::MatrixXd& y,
                                     std::size_t fit_length) {
  require(fit_length >= 1 && fit_length <= static_cast<std::size_t>(y.cols()),
          ErrorCode::kInvalidInput, "target transform: bad fit length");
  TargetTransform tt;
  tt.kind = kind;
  tt.mean = Eigen::VectorXd::Zero(y.rows());
  tt.scale = Eigen::VectorXd::Ones(y.rows());
  if (kind == TargetTransformKind::kNone) return tt;
  Eigen::MatrixXd base = y.leftCols(static_cast<Eigen::Index>(fit_length));
  if (kind == TargetTransformKind::kLog1pStandardize) {
    require((base.array() > -1.0).all(), ErrorCode::kInvalidInput,
            "log1p transform needs targets > -1; use target_transform=standardize");
    base = base.array().log1p().matrix();
  }
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double mu = base.row(i).mean();
    const double var = (base.row(i).array() - mu).square().mean();
    tt.mean(i) = mu;
    tt.scale(i) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return tt;
}

Eigen::MatrixXd TargetTransform::apply(const Eigen::MatrixXd& y) const {
  if (kind == TargetTransformKind::kNone) return y;
  Eigen::MatrixXd out = y;
  if (kind == TargetTransformKind::kLog1pStandardize) {
    require((y.array() > -1.0).all(), ErrorCode::kInvalidInput,
            "log1p transform needs targets > -1; use target_transform=standardize");
    out = out.array().log1p().matrix();
  }
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    out.row(i) = (out.row(i).array() - mean(i)) / scale(i);
  return out;
}

double TargetTransform::inverse(std::size_t region, double value) const {
  if (kind == TargetTransformKind::kNone) return value;
  const auto i = static_cast<Eigen::Index>(region);
  const double v = value * scale(i) + mean(i);
  return kind == TargetTransformKind::kLog1pStandardize ? std::expm1(v) : v;
}

}  // namespace stoat
