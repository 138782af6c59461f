#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "causal.hpp"
#include "panel.hpp"
#include "spatial.hpp"

namespace stoat {

enum class NoiseFamily { kGaussian, kStudentT };

struct GeneratorSpec {
  std::size_t n_regions = 6;
  std::size_t t_steps = 300;
  // Explicit coordinates; when empty, regions are placed uniformly at random
  // inside `lat_range` x `lon_range` using `seed`.
  std::vector<GeoPoint> coordinates;
  std::pair<double, double> lat_range{35.0, 60.0};
  std::pair<double, double> lon_range{-10.0, 30.0};
  double alpha = kDefaultAlpha;

  double rho = 0.4;
  double beta0 = 1.0;
  double beta1 = 0.5;
  double beta2 = 0.3;
  double delta = -2.0;
  std::vector<double> gamma{1.0, -0.5, -1.0, 0.3};
  std::vector<std::string> covariate_names;  // defaults to R, M, V, I / c1..cD

  double treated_fraction = 0.5;
  std::size_t post_onset_index = 150;
  double covariate_persistence = 0.9;
  double covariate_noise = 1.0;
  double noise_sigma = 0.1;
  NoiseFamily noise_family = NoiseFamily::kGaussian;
  double noise_df = 4.0;  // student-t tails only
  std::size_t burn_in = 50;
  std::string start_date = "2020-03-01";
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  RegionSet regions;
  Panel panel;
  DidEstimate truth;
  // lag(i, t) = sum_j S(i, j) y(j, t - 1) as used by the generator; column 0
  // refers to the final burn-in period.
  Eigen::MatrixXd lag;
  SpatialMatrix spatial;
};

SyntheticData generate(const GeneratorSpec& spec);

}  // namespace stoat
