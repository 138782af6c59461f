#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stoat {

using Date = std::chrono::sys_days;

// Aligned regional panel: targets y (N x T), D covariate planes (each N x T),
// a per-region treatment indicator and a single global post-period step.
struct Panel {
  std::vector<std::string> region_ids;
  std::vector<Date> times;
  Eigen::MatrixXd y;
  std::vector<std::string> covariate_names;
  std::vector<Eigen::MatrixXd> covariates;
  std::vector<int> treated;
  std::vector<int> post;

  std::size_t n() const { return region_ids.size(); }
  std::size_t t() const { return times.size(); }
  std::size_t d() const { return covariates.size(); }

  // Throws ErrorCode::kInvalidInput on any broken invariant.
  void validate() const;
};

// First `length` periods of `panel`.
Panel panel_head(const Panel& panel, std::size_t length);

// Post indicator for a global onset date: 1 from the first period >= onset.
std::vector<int> post_indicator(const std::vector<Date>& times, Date onset);

std::string format_date(Date d);
// Strict ISO-8601 calendar date (YYYY-MM-DD); throws kParse.
Date parse_date(const std::string& text);

}  // namespace stoat
