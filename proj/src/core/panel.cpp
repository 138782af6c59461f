#include "panel.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "error.hpp"

namespace stoat {

void Panel::validate() const {
  const auto rows = static_cast<Eigen::Index>(n());
  const auto cols = static_cast<Eigen::Index>(t());
  require(y.rows() == rows && y.cols() == cols, ErrorCode::kInvalidInput,
          "panel: y shape does not match regions x times");
  require(covariate_names.size() == covariates.size(), ErrorCode::kInvalidInput,
          "panel: covariate name count mismatch");
  for (const auto& c : covariates)
    require(c.rows() == rows && c.cols() == cols, ErrorCode::kInvalidInput,
            "panel: covariate shape does not match regions x times");
  require(treated.size() == n(), ErrorCode::kInvalidInput, "panel: treated length != N");
  require(post.size() == t(), ErrorCode::kInvalidInput, "panel: post length != T");

  for (std::size_t k = 1; k < times.size(); ++k) {
    require(times[k] > times[k - 1], ErrorCode::kInvalidInput,
            "panel: times not strictly increasing at " + format_date(times[k]));
    if (k >= 2)
      require(times[k] - times[k - 1] == times[1] - times[0], ErrorCode::kInvalidInput,
              "panel: times unevenly spaced at " + format_date(times[k]));
  }
  require(y.allFinite(), ErrorCode::kInvalidInput, "panel: non-finite target value");
  for (std::size_t k = 0; k < covariates.size(); ++k)
    require(covariates[k].allFinite(), ErrorCode::kInvalidInput,
            "panel: non-finite value in covariate " + covariate_names[k]);
  for (int v : treated)
    require(v == 0 || v == 1, ErrorCode::kInvalidInput, "panel: treated must be 0/1");
  for (std::size_t k = 0; k < post.size(); ++k) {
    require(post[k] == 0 || post[k] == 1, ErrorCode::kInvalidInput, "panel: post must be 0/1");
    if (k > 0)
      require(post[k] >= post[k - 1], ErrorCode::kInvalidInput,
              "panel: post indicator must be a single 0->1 step");
  }
}

Panel panel_head(const Panel& panel, std::size_t length) {
  require(length <= panel.t(), ErrorCode::kInvalidInput, "panel_head: length exceeds T");
  const auto len = static_cast<Eigen::Index>(length);
  Panel out;
  out.region_ids = panel.region_ids;
  out.times.assign(panel.times.begin(), panel.times.begin() + static_cast<long>(length));
  out.y = panel.y.leftCols(len);
  out.covariate_names = panel.covariate_names;
  for (const auto& c : panel.covariates) out.covariates.emplace_back(c.leftCols(len));
  out.treated = panel.treated;
  out.post.assign(panel.post.begin(), panel.post.begin() + static_cast<long>(length));
  return out;
}

std::vector<int> post_indicator(const std::vector<Date>& times, Date onset) {
  std::vector<int> post(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) post[k] = times[k] >= onset ? 1 : 0;
  return post;
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd(d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  const bool shape_ok = text.size() == 10 && text[4] == '-' && text[7] == '-';
  if (!shape_ok || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
    fail(ErrorCode::kParse, "invalid ISO-8601 date '" + text + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) fail(ErrorCode::kParse, "invalid calendar date '" + text + "'");
  return std::chrono::sys_days(ymd);
}

}  // namespace stoat
