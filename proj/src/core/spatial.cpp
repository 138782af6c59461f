#include "spatial.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "error.hpp"

namespace stoat {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void validate_point(const GeoPoint& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
    std::ostringstream msg;
    msg << "coordinate out of range: lat=" << p.lat << " lon=" << p.lon;
    fail(ErrorCode::kInvalidInput, msg.str());
  }
}

RegionSet::RegionSet(std::vector<Region> regions) : regions_(std::move(regions)) {
  std::unordered_set<std::string> seen;
  for (const auto& r : regions_) {
    require(!r.id.empty(), ErrorCode::kInvalidInput, "empty region_id");
    require(seen.insert(r.id).second, ErrorCode::kInvalidInput,
            "duplicate region_id '" + r.id + "'");
    validate_point(r.location);
  }
}

std::vector<std::string> RegionSet::ids() const {
  std::vector<std::string> out;
  out.reserve(regions_.size());
  for (const auto& r : regions_) out.push_back(r.id);
  return out;
}

int RegionSet::find(const std::string& id) const {
  for (std::size_t i = 0; i < regions_.size(); ++i)
    if (regions_[i].id == id) return static_cast<int>(i);
  return -1;
}

double geodesic_distance(const GeoPoint& a, const GeoPoint& b) {
  validate_point(a);
  validate_point(b);
  const double phi1 = radians(a.lat);
  const double phi2 = radians(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = radians(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

SpatialMatrix::SpatialMatrix(std::vector<std::string> ids, Eigen::MatrixXd weights,
                             double alpha)
    : ids_(std::move(ids)), weights_(std::move(weights)), alpha_(alpha) {
  require(weights_.rows() == weights_.cols(), ErrorCode::kInvalidInput,
          "spatial matrix must be square");
  require(ids_.size() == static_cast<std::size_t>(weights_.rows()),
          ErrorCode::kInvalidInput, "spatial matrix id count mismatch");
}

SpatialMatrix build_spatial_matrix(const RegionSet& regions, double alpha) {
  const auto n = static_cast<Eigen::Index>(regions.size());
  require(n >= 2, ErrorCode::kDegenerateInput,
          "spatial matrix needs at least 2 regions, got " + std::to_string(n));
  require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::kInvalidInput,
          "alpha must be > 0");

  // Weights are formed in log space so large alpha cannot underflow a row.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd log_w(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = std::max(
          geodesic_distance(regions[static_cast<std::size_t>(i)].location,
                            regions[static_cast<std::size_t>(j)].location),
          kDistanceFloorKm);
      log_w(j) = -alpha * std::log(d);
      peak = std::max(peak, log_w(j));
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      w(i, j) = std::exp(log_w(j) - peak);
      total += w(i, j);
    }
    w.row(i) /= total;
  }
  return SpatialMatrix(regions.ids(), std::move(w), alpha);
}

Eigen::MatrixXd spatial_lag(const SpatialMatrix& s, const Eigen::MatrixXd& series) {
  if (static_cast<std::size_t>(series.rows()) != s.n()) {
    std::ostringstream msg;
    msg << "spatial_lag: series has " << series.rows() << " rows, matrix has "
        << s.n() << " regions";
    fail(ErrorCode::kInvalidInput, msg.str());
  }
  return s.weights() * series;
}

}  // namespace stoat
