#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "error.hpp"

namespace stoat {

namespace {

constexpr double kExplosionLimit = 1e9;

std::vector<std::string> default_covariate_names(std::size_t d) {
  if (d == 4) return {"R", "M", "V", "I"};
  std::vector<std::string> out;
  for (std::size_t k = 0; k < d; ++k) out.push_back("c" + std::to_string(k + 1));
  return out;
}

}  // namespace

void GeneratorSpec::validate() const {
  require(n_regions >= 2, ErrorCode::kInvalidInput, "generator: n_regions must be >= 2");
  require(std::abs(rho) < 1.0, ErrorCode::kInvalidInput, "generator: |rho| must be < 1");
  require(post_onset_index > 1 && post_onset_index < t_steps, ErrorCode::kInvalidInput,
          "generator: post_onset_index must lie in (1, t_steps)");
  require(treated_fraction > 0.0 && treated_fraction < 1.0, ErrorCode::kInvalidInput,
          "generator: treated_fraction must lie in (0, 1)");
  require(coordinates.empty() || coordinates.size() == n_regions, ErrorCode::kInvalidInput,
          "generator: coordinate count must equal n_regions");
  require(covariate_names.empty() || covariate_names.size() == gamma.size(),
          ErrorCode::kInvalidInput, "generator: covariate_names length must equal gamma");
  require(noise_sigma >= 0.0 && covariate_noise >= 0.0, ErrorCode::kInvalidInput,
          "generator: noise scales must be >= 0");
  require(std::abs(covariate_persistence) < 1.0, ErrorCode::kInvalidInput,
          "generator: covariate persistence must satisfy |phi| < 1");
  require(noise_family != NoiseFamily::kStudentT || noise_df > 2.0, ErrorCode::kInvalidInput,
          "generator: student-t noise needs df > 2");
}

SyntheticData generate(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  const std::size_t n = spec.n_regions;
  const std::size_t d = spec.gamma.size();

  std::vector<Region> regions(n);
  std::uniform_real_distribution<double> lat(spec.lat_range.first, spec.lat_range.second);
  std::uniform_real_distribution<double> lon(spec.lon_range.first, spec.lon_range.second);
  for (std::size_t i = 0; i < n; ++i) {
    regions[i].id = "R" + std::to_string(i + 1);
    if (spec.coordinates.empty()) {
      regions[i].location.lat = lat(rng);
      regions[i].location.lon = lon(rng);
    } else {
      regions[i].location = spec.coordinates[i];
    }
  }
  const auto n_treated = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(spec.treated_fraction * static_cast<double>(n))), 1,
      n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < n_treated; ++k) regions[order[k]].treated = true;

  SyntheticData out{RegionSet(regions), Panel{}, DidEstimate{}, Eigen::MatrixXd{},
                    build_spatial_matrix(RegionSet(regions), spec.alpha)};
  const Eigen::MatrixXd& w = out.spatial.weights();

  const std::size_t total = spec.burn_in + spec.t_steps;
  const auto tn = static_cast<Eigen::Index>(total);
  const auto nn = static_cast<Eigen::Index>(n);
  std::vector<Eigen::MatrixXd> cov(d, Eigen::MatrixXd(nn, tn));
  const double phi = spec.covariate_persistence;
  const double stationary_sd = spec.covariate_noise / std::sqrt(1.0 - phi * phi);
  for (std::size_t k = 0; k < d; ++k)
    for (Eigen::Index i = 0; i < nn; ++i) {
      cov[k](i, 0) = stationary_sd * std_normal(rng);
      for (Eigen::Index t = 1; t < tn; ++t)
        cov[k](i, t) = phi * cov[k](i, t - 1) + spec.covariate_noise * std_normal(rng);
    }

  std::student_t_distribution<double> student(spec.noise_df);
  const double t_scale =
      spec.noise_family == NoiseFamily::kStudentT ? std::sqrt((spec.noise_df - 2.0) / spec.noise_df)
                                                  : 1.0;
  auto draw_noise = [&]() {
    if (spec.noise_sigma == 0.0) return 0.0;
    const double e = spec.noise_family == NoiseFamily::kGaussian ? std_normal(rng)
                                                                 : t_scale * student(rng);
    return spec.noise_sigma * e;
  };

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(nn, tn);
  Eigen::MatrixXd lag = Eigen::MatrixXd::Zero(nn, tn);
  const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(nn);
  for (Eigen::Index t = 0; t < tn; ++t) {
    const Eigen::VectorXd prev = t > 0 ? Eigen::VectorXd(y.col(t - 1)) : y0;
    lag.col(t) = w * prev;
    const auto kept = static_cast<std::size_t>(t) >= spec.burn_in
                          ? static_cast<std::size_t>(t) - spec.burn_in
                          : 0;
    const double post =
        static_cast<std::size_t>(t) >= spec.burn_in && kept >= spec.post_onset_index ? 1.0 : 0.0;
    for (Eigen::Index i = 0; i < nn; ++i) {
      const double treated = regions[static_cast<std::size_t>(i)].treated ? 1.0 : 0.0;
      double v = spec.rho * lag(i, t) + spec.beta0 + spec.beta1 * treated + spec.beta2 * post +
                 spec.delta * treated * post;
      for (std::size_t k = 0; k < d; ++k) v += spec.gamma[k] * cov[k](i, t);
      v += draw_noise();
      if (!std::isfinite(v) || std::abs(v) > kExplosionLimit)
        fail(ErrorCode::kGeneratorInstability,
             "generator: explosive dynamics at step " + std::to_string(t));
      y(i, t) = v;
    }
  }

  const auto burn = static_cast<Eigen::Index>(spec.burn_in);
  const auto keep = static_cast<Eigen::Index>(spec.t_steps);
  Panel& p = out.panel;
  p.region_ids = out.regions.ids();
  const Date start = parse_date(spec.start_date);
  for (std::size_t t = 0; t < spec.t_steps; ++t)
    p.times.push_back(start + std::chrono::days(static_cast<long>(t)));
  p.y = y.middleCols(burn, keep);
  p.covariate_names =
      spec.covariate_names.empty() ? default_covariate_names(d) : spec.covariate_names;
  for (std::size_t k = 0; k < d; ++k) p.covariates.emplace_back(cov[k].middleCols(burn, keep));
  for (const auto& r : regions) p.treated.push_back(r.treated ? 1 : 0);
  p.post = post_indicator(p.times, p.times[spec.post_onset_index]);
  p.validate();
  out.lag = lag.middleCols(burn, keep);

  DidEstimate& truth = out.truth;
  truth.rho = spec.rho;
  truth.beta0 = spec.beta0;
  truth.beta1 = spec.beta1;
  truth.beta2 = spec.beta2;
  truth.delta = spec.delta;
  truth.covariate_names = p.covariate_names;
  truth.gamma = Eigen::Map<const Eigen::VectorXd>(spec.gamma.data(), static_cast<Eigen::Index>(d));
  truth.gamma_se = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  truth.residual_variance = spec.noise_sigma * spec.noise_sigma;
  truth.observations = n * spec.t_steps;
  return out;
}

}  // namespace stoat
