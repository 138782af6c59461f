#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stoat {

inline constexpr double kEarthRadiusKm = 6371.0088;
// Pairwise distances below this are clamped before inversion.
inline constexpr double kDistanceFloorKm = 1.0;
inline constexpr double kDefaultAlpha = 1.0;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

struct Region {
  std::string id;
  GeoPoint location;
  bool treated = false;
};

// Ordered regions with unique ids. Construction validates coordinates.
class RegionSet {
 public:
  RegionSet() = default;
  explicit RegionSet(std::vector<Region> regions);

  std::size_t size() const { return regions_.size(); }
  const Region& operator[](std::size_t i) const { return regions_[i]; }
  const std::vector<Region>& regions() const { return regions_; }
  std::vector<std::string> ids() const;
  // Index of `id`, or -1.
  int find(const std::string& id) const;

 private:
  std::vector<Region> regions_;
};

void validate_point(const GeoPoint& p);

// Haversine great-circle distance in kilometres.
double geodesic_distance(const GeoPoint& a, const GeoPoint& b);

// Row-stochastic inverse-distance weights with a zero diagonal.
class SpatialMatrix {
 public:
  SpatialMatrix(std::vector<std::string> ids, Eigen::MatrixXd weights, double alpha);

  std::size_t n() const { return static_cast<std::size_t>(weights_.rows()); }
  double alpha() const { return alpha_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const std::vector<std::string>& region_ids() const { return ids_; }
  double operator()(std::size_t i, std::size_t j) const {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd weights_;
  double alpha_;
};

SpatialMatrix build_spatial_matrix(const RegionSet& regions, double alpha);

// out(i, t) = sum_j S(i, j) * series(j, t). No temporal shift is applied.
Eigen::MatrixXd spatial_lag(const SpatialMatrix& s, const Eigen::MatrixXd& series);

}  // namespace stoat
