#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stoat {

// Sample ensemble indexed by (region, horizon step, sample). Sample index s
// identifies one joint path across all regions and steps.
class ForecastDistribution {
 public:
  ForecastDistribution() = default;
  ForecastDistribution(std::size_t regions, std::size_t horizon, std::size_t num_samples,
                       std::vector<double> values);

  std::size_t regions() const { return regions_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t num_samples() const { return num_samples_; }

  std::span<const double> samples(std::size_t region, std::size_t step) const;
  double at(std::size_t region, std::size_t step, std::size_t sample) const;

  // Type-7 quantile of the cell's samples; monotone in q.
  double quantile(std::size_t region, std::size_t step, double q) const;
  double mean(std::size_t region, std::size_t step) const;

  // Sample path s flattened region-major: index = region * horizon + step.
  Eigen::VectorXd path(std::size_t sample) const;
  // Paths as rows of a num_samples x (regions * horizon) matrix.
  Eigen::MatrixXd path_matrix() const;
  // Same restricted to one region: num_samples x horizon.
  Eigen::MatrixXd region_path_matrix(std::size_t region) const;

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t offset(std::size_t region, std::size_t step) const;

  std::size_t regions_ = 0;
  std::size_t horizon_ = 0;
  std::size_t num_samples_ = 0;
  std::vector<double> values_;
  std::vector<double> sorted_;
};

}  // namespace stoat
