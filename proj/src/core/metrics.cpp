#include "metrics.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace stoat {

ForecastDistribution::ForecastDistribution(std::size_t regions, std::size_t horizon,
                                           std::size_t num_samples, std::vector<double> values)
    : regions_(regions), horizon_(horizon), num_samples_(num_samples), values_(std::move(values)) {
  require(values_.size() == regions * horizon * num_samples, ErrorCode::kInvalidInput,
          "forecast distribution: value count does not match shape");
  require(num_samples >= 1, ErrorCode::kInvalidInput, "forecast distribution: no samples");
  for (double v : values_)
    require(std::isfinite(v), ErrorCode::kInvalidInput, "forecast distribution: non-finite sample");
  sorted_ = values_;
  for (std::size_t c = 0; c < regions * horizon; ++c) {
    auto first = sorted_.begin() + static_cast<long>(c * num_samples);
    std::sort(first, first + static_cast<long>(num_samples));
  }
}

std::size_t ForecastDistribution::offset(std::size_t region, std::size_t step) const {
  require(region < regions_ && step < horizon_, ErrorCode::kInvalidInput,
          "forecast distribution: cell index out of range");
  return (region * horizon_ + step) * num_samples_;
}

std::span<const double> ForecastDistribution::samples(std::size_t region, std::size_t step) const {
  return {values_.data() + offset(region, step), num_samples_};
}

double ForecastDistribution::at(std::size_t region, std::size_t step, std::size_t sample) const {
  return values_[offset(region, step) + sample];
}

double ForecastDistribution::quantile(std::size_t region, std::size_t step, double q) const {
  return sorted_quantile({sorted_.data() + offset(region, step), num_samples_}, q);
}

double ForecastDistribution::mean(std::size_t region, std::size_t step) const {
  const auto s = samples(region, step);
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(s.size());
}

Eigen::VectorXd ForecastDistribution::path(std::size_t sample) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(regions_ * horizon_));
  for (std::size_t c = 0; c < regions_ * horizon_; ++c)
    out(static_cast<Eigen::Index>(c)) = values_[c * num_samples_ + sample];
  return out;
}

Eigen::MatrixXd ForecastDistribution::path_matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(num_samples_),
                      static_cast<Eigen::Index>(regions_ * horizon_));
  for (std::size_t s = 0; s < num_samples_; ++s) out.row(static_cast<Eigen::Index>(s)) = path(s);
  return out;
}

Eigen::MatrixXd ForecastDistribution::region_path_matrix(std::size_t region) const {
  const auto h = static_cast<Eigen::Index>(horizon_);
  return path_matrix().middleCols(static_cast<Eigen::Index>(region) * h, h);
}

double sorted_quantile(std::span<const double> sorted, double q) {
  require(!sorted.empty(), ErrorCode::kInvalidInput, "quantile: empty sample");
  require(q >= 0.0 && q <= 1.0, ErrorCode::kInvalidInput, "quantile: q must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> samples, double q) {
  require(!samples.empty(), ErrorCode::kInvalidInput, "quantile: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, q);
}

double crps_from_samples(std::span<const double> samples, double observed) {
  require(samples.size() >= 2, ErrorCode::kInvalidInput, "crps: need at least 2 samples");
  const auto n = static_cast<double>(samples.size());
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double abs_err = 0.0;
  double spread = 0.0;  // sum_{k<l} (x_(l) - x_(k))
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    abs_err += std::abs(sorted[k] - observed);
    spread += sorted[k] * (2.0 * static_cast<double>(k) - n + 1.0);
  }
  return abs_err / n - spread / (n * n);
}

double energy_score(const Eigen::MatrixXd& paths, const Eigen::VectorXd& observed) {
  require(paths.rows() >= 2, ErrorCode::kInvalidInput, "energy score: need at least 2 sample paths");
  require(paths.cols() == observed.size(), ErrorCode::kInvalidInput,
          "energy score: path dimension does not match observation");
  const auto n = static_cast<double>(paths.rows());
  double fit = 0.0;
  for (Eigen::Index k = 0; k < paths.rows(); ++k)
    fit += (paths.row(k).transpose() - observed).norm();
  double spread = 0.0;
  for (Eigen::Index k = 0; k < paths.rows(); ++k)
    for (Eigen::Index l = k + 1; l < paths.rows(); ++l) spread += (paths.row(k) - paths.row(l)).norm();
  return fit / n - spread / (n * n);
}

QuantileFn quantiles_of(const ForecastDistribution& forecast) {
  return [&forecast](std::size_t i, std::size_t h, double q) { return forecast.quantile(i, h, q); };
}

double weighted_quantile_loss(const QuantileFn& forecast, const Eigen::MatrixXd& observed,
                              double tau) {
  require(tau > 0.0 && tau < 1.0, ErrorCode::kInvalidInput, "wql: tau must lie in (0, 1)");
  double loss = 0.0;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < observed.rows(); ++i)
    for (Eigen::Index h = 0; h < observed.cols(); ++h) {
      const double x = observed(i, h);
      const double q =
          forecast(static_cast<std::size_t>(i), static_cast<std::size_t>(h), tau);
      loss += q > x ? (1.0 - tau) * (q - x) : tau * (x - q);
      scale += std::abs(x);
    }
  require(scale > 0.0, ErrorCode::kInvalidInput, "wql: all observations are zero");
  return 2.0 * loss / scale;
}

double coverage(const QuantileFn& forecast, const Eigen::MatrixXd& observed, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::kInvalidInput, "coverage: alpha must lie in (0, 1)");
  require(observed.size() > 0, ErrorCode::kInvalidInput, "coverage: no observations");
  std::size_t inside = 0;
  for (Eigen::Index i = 0; i < observed.rows(); ++i)
    for (Eigen::Index h = 0; h < observed.cols(); ++h) {
      const auto ii = static_cast<std::size_t>(i);
      const auto hh = static_cast<std::size_t>(h);
      const double x = observed(i, h);
      if (forecast(ii, hh, alpha / 2.0) <= x && x <= forecast(ii, hh, 1.0 - alpha / 2.0)) ++inside;
    }
  return static_cast<double>(inside) / static_cast<double>(observed.size());
}

double quantile_exceedance(const QuantileFn& forecast, const Eigen::MatrixXd& observed,
                           double tau) {
  require(observed.size() > 0, ErrorCode::kInvalidInput, "exceedance: no observations");
  std::size_t below = 0;
  for (Eigen::Index i = 0; i < observed.rows(); ++i)
    for (Eigen::Index h = 0; h < observed.cols(); ++h)
      if (observed(i, h) <= forecast(static_cast<std::size_t>(i), static_cast<std::size_t>(h), tau))
        ++below;
  return static_cast<double>(below) / static_cast<double>(observed.size());
}

namespace {

ScoreReport score_block(const ForecastDistribution& f, const Eigen::MatrixXd& observed,
                        std::size_t first_region, std::size_t count) {
  const QuantileFn q = [&](std::size_t i, std::size_t h, double level) {
    return f.quantile(first_region + i, h, level);
  };
  ScoreReport r;
  double crps = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t h = 0; h < f.horizon(); ++h)
      crps += crps_from_samples(f.samples(first_region + i, h),
                                observed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)));
  r.crps = crps / static_cast<double>(count * f.horizon());
  const bool any_nonzero = (observed.array() != 0.0).any();
  for (double level : kReportLevels) {
    r.wql[level] = any_nonzero ? weighted_quantile_loss(q, observed, level)
                               : std::numeric_limits<double>::quiet_NaN();
    r.coverage_interval[level] = coverage(q, observed, level);
    r.coverage_quantile[level] = quantile_exceedance(q, observed, level);
  }
  const auto h = static_cast<Eigen::Index>(f.horizon());
  const Eigen::MatrixXd paths = f.path_matrix().middleCols(
      static_cast<Eigen::Index>(first_region) * h, static_cast<Eigen::Index>(count) * h);
  Eigen::VectorXd obs(static_cast<Eigen::Index>(count) * h);
  for (std::size_t i = 0; i < count; ++i)
    obs.segment(static_cast<Eigen::Index>(i) * h, h) = observed.row(static_cast<Eigen::Index>(i)).transpose();
  r.energy = f.num_samples() >= 2 ? energy_score(paths, obs) : 0.0;
  return r;
}

}  // namespace

ScoreSummary score_forecast(const ForecastDistribution& forecast, const Eigen::MatrixXd& observed,
                            const std::vector<std::string>& region_ids) {
  require(observed.rows() == static_cast<Eigen::Index>(forecast.regions()) &&
              observed.cols() == static_cast<Eigen::Index>(forecast.horizon()),
          ErrorCode::kAlignment, "score: observation shape does not match forecast");
  require(region_ids.size() == forecast.regions(), ErrorCode::kInvalidInput,
          "score: region id count mismatch");
  require(forecast.num_samples() >= 2, ErrorCode::kInvalidInput, "score: need at least 2 samples");
  ScoreSummary out;
  out.overall = score_block(forecast, observed, 0, forecast.regions());
  for (std::size_t i = 0; i < forecast.regions(); ++i)
    out.per_region.push_back(
        {region_ids[i], score_block(forecast, observed.row(static_cast<Eigen::Index>(i)), i, 1)});
  return out;
}

}  // namespace stoat
