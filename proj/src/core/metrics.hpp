#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forecast_distribution.hpp"

namespace stoat {

// Type-7 (linear interpolation between order statistics) sample quantile.
double quantile(std::span<const double> samples, double q);
// Same, for samples already sorted ascending.
double sorted_quantile(std::span<const double> sorted, double q);

// Energy-form CRPS estimator:
//   (1/n) sum_k |x_k - y| - (1/(2 n^2)) sum_k sum_l |x_k - x_l|
double crps_from_samples(std::span<const double> samples, double observed);

// Multivariate energy score with beta = 1 and Euclidean norm. Each row of
// `paths` is one sample of the joint vector.
double energy_score(const Eigen::MatrixXd& paths, const Eigen::VectorXd& observed);

using QuantileFn = std::function<double(std::size_t region, std::size_t step, double q)>;

QuantileFn quantiles_of(const ForecastDistribution& forecast);

// 2 * sum Q(tau) / sum |x| with the asymmetric pinball penalty.
double weighted_quantile_loss(const QuantileFn& forecast, const Eigen::MatrixXd& observed,
                              double tau);

// Fraction of cells with q(alpha/2) <= x <= q(1 - alpha/2).
double coverage(const QuantileFn& forecast, const Eigen::MatrixXd& observed, double alpha);

// Fraction of cells with x <= q(tau).
double quantile_exceedance(const QuantileFn& forecast, const Eigen::MatrixXd& observed,
                           double tau);

inline const std::vector<double> kReportLevels{0.1, 0.5, 0.9};

struct ScoreReport {
  double crps = 0.0;
  std::map<double, double> wql;
  std::map<double, double> coverage_interval;  // key: alpha
  std::map<double, double> coverage_quantile;  // key: tau
  double energy = 0.0;
};

struct RegionScores {
  std::string region_id;
  ScoreReport scores;
};

struct ScoreSummary {
  ScoreReport overall;
  std::vector<RegionScores> per_region;
};

// `observed` is regions x horizon on the same scale as the samples.
ScoreSummary score_forecast(const ForecastDistribution& forecast, const Eigen::MatrixXd& observed,
                            const std::vector<std::string>& region_ids);

}  // namespace stoat
