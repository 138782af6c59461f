#pragma once

#include <random>
#include <span>
#include <string>

namespace stoat {

enum class Family { kGaussian, kLaplace, kStudentT };

Family parse_family(const std::string& name);
std::string family_name(Family family);
// Raw head outputs per step: 2 for gaussian/laplace, 3 for student-t.
std::size_t family_arity(Family family);

inline constexpr double kSigmaFloor = 1e-6;
inline constexpr double kNuFloor = 2.0;
// Keeps nu strictly above kNuFloor when softplus underflows.
inline constexpr double kNuMargin = 1e-6;

struct DistributionParams {
  Family family = Family::kGaussian;
  double mu = 0.0;
  double sigma = 1.0;
  double nu = 0.0;  // student-t only
};

double softplus(double x);
double sigmoid(double x);

// mu = raw[0]; sigma = softplus(raw[1]) + 1e-6; nu = 2 + softplus(raw[2]).
DistributionParams link(Family family, std::span<const double> raw);

// Negative log density of y.
double nll(const DistributionParams& params, double y);

// NLL of y under link(raw), and d NLL / d raw written to `grad_raw`.
double nll_with_grad(Family family, std::span<const double> raw, double y,
                     std::span<double> grad_raw);

double density(const DistributionParams& params, double y);

double draw(const DistributionParams& params, std::mt19937_64& rng);

}  // namespace stoat
