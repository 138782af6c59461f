#include "dataset.hpp"

#include <map>
#include <sstream>

#include "../error.hpp"
#include "csv.hpp"

namespace stoat {

namespace {

struct PanelRow {
  Date date;
  std::vector<double> values;  // y then covariates
  std::size_t line = 0;
};

}  // namespace

RegionSet read_regions(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_id = t.require_column("region_id");
  const std::size_t c_lat = t.require_column("lat");
  const std::size_t c_lon = t.require_column("lon");
  const std::size_t c_treated = t.require_column("treated");
  std::vector<Region> regions;
  std::map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = t.where(r);
    require(!row[c_id].empty(), ErrorCode::kParse, where + ": empty region_id");
    if (const auto it = seen.find(row[c_id]); it != seen.end())
      fail(ErrorCode::kInvalidInput, where + ": duplicate region '" + row[c_id] +
                                         "' (first defined at line " + std::to_string(it->second) + ")");
    seen[row[c_id]] = t.line_numbers[r];
    Region reg;
    reg.id = row[c_id];
    reg.location = {parse_real(row[c_lat], where), parse_real(row[c_lon], where)};
    const auto treated = parse_integer(row[c_treated], where);
    require(treated == 0 || treated == 1, ErrorCode::kInvalidInput, where + ": treated must be 0 or 1");
    reg.treated = treated == 1;
    try {
      validate_point(reg.location);
    } catch (const Error& e) {
      fail(e.code(), where + ": " + e.what());
    }
    regions.push_back(std::move(reg));
  }
  require(!regions.empty(), ErrorCode::kInvalidInput, path + ": no regions");
  return RegionSet(std::move(regions));
}

Dataset ingest(const std::string& regions_path, const std::string& panel_path,
               const IngestOptions& options) {
  Dataset out;
  out.regions = read_regions(regions_path);
  const CsvTable t = read_csv(panel_path);
  const std::size_t c_id = t.require_column("region_id");
  const std::size_t c_date = t.require_column("date");
  const std::size_t c_y = t.require_column("y");

  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  if (options.covariates.empty()) {
    for (std::size_t k = 0; k < t.header.size(); ++k)
      if (k != c_id && k != c_date && k != c_y) {
        cov_cols.push_back(k);
        cov_names.push_back(t.header[k]);
      }
  } else {
    for (const auto& name : options.covariates) {
      const int k = t.column(name);
      if (k < 0) fail(ErrorCode::kParse, panel_path + ": missing covariate column '" + name + "'");
      cov_cols.push_back(static_cast<std::size_t>(k));
      cov_names.push_back(name);
    }
  }

  const std::size_t n = out.regions.size();
  std::vector<std::vector<PanelRow>> by_region(n);
  std::vector<std::map<Date, std::size_t>> seen(n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = t.where(r);
    const int region = out.regions.find(row[c_id]);
    if (region < 0)
      fail(ErrorCode::kInvalidInput, where + ": unknown region '" + row[c_id] + "' (not in " +
                                         regions_path + ")");
    const auto i = static_cast<std::size_t>(region);
    Date date;
    try {
      date = parse_date(row[c_date]);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, where + ": " + e.what());
    }
    if (const auto it = seen[i].find(date); it != seen[i].end())
      fail(ErrorCode::kInvalidInput, where + ": duplicate (region, date) key (" + row[c_id] + ", " +
                                         row[c_date] + "), first at line " + std::to_string(it->second));
    if (!by_region[i].empty() && date < by_region[i].back().date)
      fail(ErrorCode::kInvalidInput, where + ": non-monotone dates for region '" + row[c_id] + "' (" +
                                         row[c_date] + " after " + format_date(by_region[i].back().date) + ")");
    seen[i][date] = t.line_numbers[r];
    PanelRow pr{date, {}, t.line_numbers[r]};
    pr.values.push_back(parse_real(row[c_y], where + " column y"));
    for (std::size_t k = 0; k < cov_cols.size(); ++k)
      pr.values.push_back(parse_real(row[cov_cols[k]], where + " column " + cov_names[k]));
    by_region[i].push_back(std::move(pr));
  }

  for (std::size_t i = 0; i < n; ++i)
    require(!by_region[i].empty(), ErrorCode::kInvalidInput,
            panel_path + ": region '" + out.regions[i].id + "' has no rows");
  const auto& ref = by_region[0];
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rows = by_region[i];
    for (std::size_t k = 2; k < rows.size(); ++k)
      if (rows[k].date - rows[k - 1].date != rows[1].date - rows[0].date)
        fail(ErrorCode::kInvalidInput,
             panel_path + ":" + std::to_string(rows[k].line) + ": gap in dates for region '" +
                 out.regions[i].id + "' between " + format_date(rows[k - 1].date) + " and " +
                 format_date(rows[k].date));
    if (rows.size() != ref.size() || rows.front().date != ref.front().date ||
        rows.back().date != ref.back().date)
      fail(ErrorCode::kAlignment, panel_path + ": dates of region '" + out.regions[i].id +
                                      "' do not match region '" + out.regions[0].id + "'");
  }

  Panel& p = out.panel;
  const std::size_t periods = ref.size();
  p.region_ids = out.regions.ids();
  for (const auto& row : ref) p.times.push_back(row.date);
  p.y.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(periods));
  p.covariate_names = cov_names;
  p.covariates.assign(cov_names.size(), Eigen::MatrixXd(p.y.rows(), p.y.cols()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t_idx = 0; t_idx < periods; ++t_idx) {
      const auto& v = by_region[i][t_idx].values;
      const auto ii = static_cast<Eigen::Index>(i);
      const auto tt = static_cast<Eigen::Index>(t_idx);
      p.y(ii, tt) = v[0];
      for (std::size_t k = 0; k < cov_names.size(); ++k) p.covariates[k](ii, tt) = v[k + 1];
    }
  for (const auto& r : out.regions.regions()) p.treated.push_back(r.treated ? 1 : 0);
  p.post = options.post_onset ? post_indicator(p.times, *options.post_onset)
                              : std::vector<int>(periods, 0);
  p.validate();
  return out;
}

void write_regions(const std::string& path, const RegionSet& regions) {
  std::ostringstream os;
  os << "region_id,lat,lon,treated\n";
  for (const auto& r : regions.regions())
    os << r.id << ',' << format_real(r.location.lat) << ',' << format_real(r.location.lon) << ','
       << (r.treated ? 1 : 0) << '\n';
  write_text_file(path, os.str());
}

void write_panel(const std::string& path, const Panel& panel) {
  std::ostringstream os;
  os << "region_id,date,y";
  for (const auto& name : panel.covariate_names) os << ',' << name;
  os << '\n';
  for (std::size_t i = 0; i < panel.n(); ++i)
    for (std::size_t t = 0; t < panel.t(); ++t) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto tt = static_cast<Eigen::Index>(t);
      os << panel.region_ids[i] << ',' << format_date(panel.times[t]) << ','
         << format_real(panel.y(ii, tt));
      for (const auto& c : panel.covariates) os << ',' << format_real(c(ii, tt));
      os << '\n';
    }
  write_text_file(path, os.str());
}

}  // namespace stoat
