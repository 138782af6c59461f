#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "../causal.hpp"
#include "../forecast_distribution.hpp"
#include "../metrics.hpp"
#include "../panel.hpp"
#include "../spatial.hpp"

namespace stoat {

void write_spatial_matrix(const std::string& path, const SpatialMatrix& s);
SpatialMatrix read_spatial_matrix(const std::string& path, double alpha);

// parameter,estimate,std_error in canonical coefficient order.
void write_did_estimate(const std::string& path, const DidEstimate& est);
DidEstimate read_did_estimate(const std::string& path);

// Ground-truth generator parameters: parameter,value.
void write_ground_truth(const std::string& path, const DidEstimate& truth);

void write_target_transform(const std::string& path, const std::vector<std::string>& ids,
                            const TargetTransform& tt);
TargetTransform read_target_transform(const std::string& path, const std::vector<std::string>& ids);

// Causally adjusted series on the model scale.
struct AdjustedSeries {
  std::vector<std::string> region_ids;
  std::vector<Date> times;
  Eigen::MatrixXd y;        // transformed observed target
  Eigen::MatrixXd y_tilde;  // y - delta * T * Post
  Eigen::MatrixXd z;        // y_tilde + rho * S y_tilde
};

void write_adjusted(const std::string& path, const AdjustedSeries& a);
AdjustedSeries read_adjusted(const std::string& path);

void write_loss_trace(const std::string& path, const std::vector<double>& trace);

// Samples with their region ids and target dates (one per horizon step).
struct ForecastFile {
  std::vector<std::string> region_ids;
  std::vector<Date> dates;
  ForecastDistribution samples;
};

void write_forecast_samples(const std::string& path, const ForecastFile& f);
ForecastFile read_forecast_samples(const std::string& path);

// (region_id, date) -> y from a panel-format CSV.
using TruthTable = std::map<std::pair<std::string, Date>, double>;
TruthTable read_truth(const std::string& path);

// Observed matrix aligned to a forecast's cells; kAlignment when a cell has no truth.
Eigen::MatrixXd align_truth(const ForecastFile& f, const TruthTable& truth);

struct Evaluation {
  ScoreSummary summary;
  std::vector<ScoreReport> by_horizon;  // one report per horizon step
};

Evaluation evaluate_forecast(const ForecastFile& f, const Eigen::MatrixXd& observed);

// metric,level,value
std::string scores_csv(const ScoreReport& r);
// region_id,metric,level,value
std::string scores_by_region_csv(const ScoreSummary& s);
// model,horizon,metric,value; horizon "all" holds the aggregate.
std::string scores_long_csv(const std::string& model, const Evaluation& e);

}  // namespace stoat
