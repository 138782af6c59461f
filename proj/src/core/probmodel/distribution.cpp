#include "distribution.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>

#include "../error.hpp"

namespace stoat {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

void check_params(const DistributionParams& p) {
  require(std::isfinite(p.mu) && p.sigma > 0.0 && std::isfinite(p.sigma), ErrorCode::kInternal,
          "distribution parameters violate sigma > 0");
  require(p.family != Family::kStudentT || p.nu > kNuFloor, ErrorCode::kInternal,
          "distribution parameters violate nu > 2");
}

}  // namespace

Family parse_family(const std::string& name) {
  if (name == "gaussian") return Family::kGaussian;
  if (name == "laplace") return Family::kLaplace;
  if (name == "student_t") return Family::kStudentT;
  fail(ErrorCode::kInvalidInput, "unknown distribution '" + name + "'");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::kGaussian: return "gaussian";
    case Family::kLaplace: return "laplace";
    case Family::kStudentT: return "student_t";
  }
  return "gaussian";
}

std::size_t family_arity(Family family) { return family == Family::kStudentT ? 3 : 2; }

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DistributionParams link(Family family, std::span<const double> raw) {
  require(raw.size() == family_arity(family), ErrorCode::kInternal, "link: raw arity mismatch");
  DistributionParams p;
  p.family = family;
  p.mu = raw[0];
  p.sigma = softplus(raw[1]) + kSigmaFloor;
  if (family == Family::kStudentT) p.nu = kNuFloor + softplus(raw[2]) + kNuMargin;
  return p;
}

double nll(const DistributionParams& p, double y) {
  check_params(p);
  const double r = (y - p.mu) / p.sigma;
  switch (p.family) {
    case Family::kGaussian:
      return kHalfLog2Pi + std::log(p.sigma) + 0.5 * r * r;
    case Family::kLaplace:
      return std::log(2.0 * p.sigma) + std::abs(r);
    case Family::kStudentT: {
      const double nu = p.nu;
      return -std::lgamma(0.5 * (nu + 1.0)) + std::lgamma(0.5 * nu) +
             0.5 * std::log(std::numbers::pi * nu) + std::log(p.sigma) +
             0.5 * (nu + 1.0) * std::log1p(r * r / nu);
    }
  }
  return 0.0;
}

double density(const DistributionParams& params, double y) { return std::exp(-nll(params, y)); }

double nll_with_grad(Family family, std::span<const double> raw, double y,
                     std::span<double> grad_raw) {
  const DistributionParams p = link(family, raw);
  const double value = nll(p, y);
  const double s = p.sigma;
  const double diff = y - p.mu;
  const double r = diff / s;
  double d_mu = 0.0;
  double d_sigma = 0.0;
  switch (family) {
    case Family::kGaussian:
      d_mu = -r / s;
      d_sigma = (1.0 - r * r) / s;
      break;
    case Family::kLaplace: {
      const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
      d_mu = -sign / s;
      d_sigma = (1.0 - std::abs(r)) / s;
      break;
    }
    case Family::kStudentT: {
      const double nu = p.nu;
      const double denom = nu + r * r;
      d_mu = -(nu + 1.0) * r / (s * denom);
      d_sigma = (1.0 - (nu + 1.0) * r * r / denom) / s;
      const double d_nu = -0.5 * boost::math::digamma(0.5 * (nu + 1.0)) +
                          0.5 * boost::math::digamma(0.5 * nu) + 0.5 / nu +
                          0.5 * std::log1p(r * r / nu) - (nu + 1.0) * r * r / (2.0 * nu * denom);
      grad_raw[2] = d_nu * sigmoid(raw[2]);
      break;
    }
  }
  grad_raw[0] = d_mu;
  grad_raw[1] = d_sigma * sigmoid(raw[1]);
  return value;
}

double draw(const DistributionParams& p, std::mt19937_64& rng) {
  switch (p.family) {
    case Family::kGaussian: {
      std::normal_distribution<double> dist(p.mu, p.sigma);
      return dist(rng);
    }
    case Family::kLaplace: {
      // Inverse CDF on u in (-1/2, 1/2).
      std::uniform_real_distribution<double> unif(-0.5, 0.5);
      double u = unif(rng);
      while (u == -0.5) u = unif(rng);
      const double sign = u < 0 ? -1.0 : 1.0;
      return p.mu - p.sigma * sign * std::log1p(-2.0 * std::abs(u));
    }
    case Family::kStudentT: {
      std::student_t_distribution<double> dist(p.nu);
      return p.mu + p.sigma * dist(rng);
    }
  }
  return p.mu;
}

}  // namespace stoat
