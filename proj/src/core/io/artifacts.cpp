#include "artifacts.hpp"

#include <array>
#include <map>
#include <sstream>

#include "../error.hpp"
#include "csv.hpp"

namespace stoat {

namespace {

std::string level_text(double level) { return format_real(level); }

void report_rows(std::ostream& os, const std::string& prefix, const ScoreReport& r) {
  os << prefix << "crps,," << format_real(r.crps) << '\n';
  for (const auto& [l, v] : r.wql) os << prefix << "wql," << level_text(l) << ',' << format_real(v) << '\n';
  for (const auto& [l, v] : r.coverage_interval)
    os << prefix << "coverage_interval," << level_text(l) << ',' << format_real(v) << '\n';
  for (const auto& [l, v] : r.coverage_quantile)
    os << prefix << "coverage_quantile," << level_text(l) << ',' << format_real(v) << '\n';
  os << prefix << "energy,," << format_real(r.energy) << '\n';
}

}  // namespace

void write_spatial_matrix(const std::string& path, const SpatialMatrix& s) {
  std::ostringstream os;
  os << "region_id";
  for (const auto& id : s.region_ids()) os << ',' << id;
  os << '\n';
  for (std::size_t i = 0; i < s.n(); ++i) {
    os << s.region_ids()[i];
    for (std::size_t j = 0; j < s.n(); ++j) os << ',' << format_real(s(i, j));
    os << '\n';
  }
  write_text_file(path, os.str());
}

SpatialMatrix read_spatial_matrix(const std::string& path, double alpha) {
  const CsvTable t = read_csv(path);
  require(!t.header.empty() && t.header[0] == "region_id", ErrorCode::kParse,
          path + ": first column must be region_id");
  const std::vector<std::string> ids(t.header.begin() + 1, t.header.end());
  require(t.rows.size() == ids.size(), ErrorCode::kParse, path + ": matrix is not square");
  const auto n = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd w(n, n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    require(t.rows[r][0] == ids[r], ErrorCode::kParse,
            t.where(r) + ": row label '" + t.rows[r][0] + "' does not match column order");
    for (std::size_t c = 0; c < ids.size(); ++c)
      w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_real(t.rows[r][c + 1], t.where(r));
  }
  return SpatialMatrix(ids, w, alpha);
}

void write_did_estimate(const std::string& path, const DidEstimate& est) {
  std::ostringstream os;
  os << "parameter,estimate,std_error\n";
  for (const auto& c : est.coefficients())
    os << c.name << ',' << format_real(c.estimate) << ',' << format_real(c.std_error) << '\n';
  write_text_file(path, os.str());
}

DidEstimate read_did_estimate(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_name = t.require_column("parameter");
  const std::size_t c_est = t.require_column("estimate");
  const std::size_t c_se = t.require_column("std_error");
  DidEstimate est;
  std::map<std::string, std::pair<double, double>> v;
  std::vector<double> gamma, gamma_se;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& name = t.rows[r][c_name];
    const double e = parse_real(t.rows[r][c_est], t.where(r));
    const double s = parse_real(t.rows[r][c_se], t.where(r));
    if (name.rfind("gamma_", 0) == 0) {
      est.covariate_names.push_back(name.substr(6));
      gamma.push_back(e);
      gamma_se.push_back(s);
    } else {
      v[name] = {e, s};
    }
  }
  for (const char* key : {"rho", "beta0", "beta1", "beta2", "delta"})
    require(v.count(key) == 1, ErrorCode::kParse, path + ": missing parameter '" + key + "'");
  std::tie(est.rho, est.rho_se) = v["rho"];
  std::tie(est.beta0, est.beta0_se) = v["beta0"];
  std::tie(est.beta1, est.beta1_se) = v["beta1"];
  std::tie(est.beta2, est.beta2_se) = v["beta2"];
  std::tie(est.delta, est.delta_se) = v["delta"];
  est.gamma = Eigen::Map<Eigen::VectorXd>(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
  est.gamma_se = Eigen::Map<Eigen::VectorXd>(gamma_se.data(), static_cast<Eigen::Index>(gamma_se.size()));
  est.spatial = est.rho != 0.0 || est.rho_se != 0.0;
  return est;
}

void write_ground_truth(const std::string& path, const DidEstimate& truth) {
  std::ostringstream os;
  os << "parameter,value\n";
  for (const auto& c : truth.coefficients()) os << c.name << ',' << format_real(c.estimate) << '\n';
  os << "noise_variance," << format_real(truth.residual_variance) << '\n';
  write_text_file(path, os.str());
}

void write_target_transform(const std::string& path, const std::vector<std::string>& ids,
                            const TargetTransform& tt) {
  std::ostringstream os;
  os << "region_id,kind,mean,scale\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    os << ids[i] << ',' << target_transform_name(tt.kind) << ','
       << format_real(tt.mean(static_cast<Eigen::Index>(i))) << ','
       << format_real(tt.scale(static_cast<Eigen::Index>(i))) << '\n';
  write_text_file(path, os.str());
}

TargetTransform read_target_transform(const std::string& path, const std::vector<std::string>& ids) {
  const CsvTable t = read_csv(path);
  const std::size_t c_id = t.require_column("region_id");
  const std::size_t c_kind = t.require_column("kind");
  const std::size_t c_mean = t.require_column("mean");
  const std::size_t c_scale = t.require_column("scale");
  require(t.rows.size() == ids.size(), ErrorCode::kAlignment,
          path + ": region count does not match the panel");
  TargetTransform tt;
  const auto n = static_cast<Eigen::Index>(ids.size());
  tt.mean.resize(n);
  tt.scale.resize(n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    require(t.rows[r][c_id] == ids[r], ErrorCode::kAlignment,
            t.where(r) + ": expected region '" + ids[r] + "'");
    const auto kind = parse_target_transform(t.rows[r][c_kind]);
    require(r == 0 || kind == tt.kind, ErrorCode::kParse, t.where(r) + ": mixed transform kinds");
    tt.kind = kind;
    tt.mean(static_cast<Eigen::Index>(r)) = parse_real(t.rows[r][c_mean], t.where(r));
    tt.scale(static_cast<Eigen::Index>(r)) = parse_real(t.rows[r][c_scale], t.where(r));
  }
  return tt;
}

void write_adjusted(const std::string& path, const AdjustedSeries& a) {
  std::ostringstream os;
  os << "region_id,date,y,y_tilde,z\n";
  for (std::size_t i = 0; i < a.region_ids.size(); ++i)
    for (std::size_t t = 0; t < a.times.size(); ++t) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto tt = static_cast<Eigen::Index>(t);
      os << a.region_ids[i] << ',' << format_date(a.times[t]) << ',' << format_real(a.y(ii, tt)) << ','
         << format_real(a.y_tilde(ii, tt)) << ',' << format_real(a.z(ii, tt)) << '\n';
    }
  write_text_file(path, os.str());
}

AdjustedSeries read_adjusted(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_id = t.require_column("region_id");
  const std::size_t c_date = t.require_column("date");
  const std::size_t c_y = t.require_column("y");
  const std::size_t c_yt = t.require_column("y_tilde");
  const std::size_t c_z = t.require_column("z");
  AdjustedSeries a;
  std::vector<std::vector<std::array<double, 3>>> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (a.region_ids.empty() || a.region_ids.back() != row[c_id]) {
      for (const auto& id : a.region_ids)
        require(id != row[c_id], ErrorCode::kParse, t.where(r) + ": rows of region '" + id + "' are not contiguous");
      a.region_ids.push_back(row[c_id]);
      rows.emplace_back();
    }
    Date d;
    try {
      d = parse_date(row[c_date]);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, t.where(r) + ": " + e.what());
    }
    const std::size_t k = rows.back().size();
    if (a.region_ids.size() == 1)
      a.times.push_back(d);
    else
      require(k < a.times.size() && a.times[k] == d, ErrorCode::kAlignment,
              t.where(r) + ": dates differ from the first region");
    rows.back().push_back({parse_real(row[c_y], t.where(r)), parse_real(row[c_yt], t.where(r)),
                           parse_real(row[c_z], t.where(r))});
  }
  require(!rows.empty(), ErrorCode::kParse, path + ": no rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto len = static_cast<Eigen::Index>(a.times.size());
  a.y.resize(n, len);
  a.y_tilde.resize(n, len);
  a.z.resize(n, len);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) == len, ErrorCode::kAlignment,
            path + ": region '" + a.region_ids[static_cast<std::size_t>(i)] + "' has a different length");
    for (Eigen::Index t_idx = 0; t_idx < len; ++t_idx) {
      const auto& v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(t_idx)];
      a.y(i, t_idx) = v[0];
      a.y_tilde(i, t_idx) = v[1];
      a.z(i, t_idx) = v[2];
    }
  }
  return a;
}

void write_loss_trace(const std::string& path, const std::vector<double>& trace) {
  std::ostringstream os;
  os << "epoch,mean_nll\n";
  for (std::size_t e = 0; e < trace.size(); ++e) os << e + 1 << ',' << format_real(trace[e]) << '\n';
  write_text_file(path, os.str());
}

void write_forecast_samples(const std::string& path, const ForecastFile& f) {
  std::ostringstream os;
  os << "region_id,date,horizon,sample,value\n";
  const auto& d = f.samples;
  for (std::size_t i = 0; i < d.regions(); ++i)
    for (std::size_t h = 0; h < d.horizon(); ++h) {
      const std::string prefix = f.region_ids[i] + ',' + format_date(f.dates[h]) + ',' + std::to_string(h + 1) + ',';
      for (std::size_t s = 0; s < d.num_samples(); ++s) os << prefix << s << ',' << format_real(d.at(i, h, s)) << '\n';
    }
  write_text_file(path, os.str());
}

ForecastFile read_forecast_samples(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_id = t.require_column("region_id");
  const std::size_t c_date = t.require_column("date");
  const std::size_t c_h = t.require_column("horizon");
  const std::size_t c_s = t.require_column("sample");
  const std::size_t c_v = t.require_column("value");
  require(!t.rows.empty(), ErrorCode::kParse, path + ": no rows");

  struct Cell {
    std::size_t region, step, sample;
    double value;
  };
  ForecastFile f;
  std::map<std::size_t, Date> step_dates;
  std::vector<Cell> cells;
  std::size_t max_step = 0, max_sample = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = t.where(r);
    std::size_t region = f.region_ids.size();
    for (std::size_t k = 0; k < f.region_ids.size(); ++k)
      if (f.region_ids[k] == row[c_id]) region = k;
    if (region == f.region_ids.size()) f.region_ids.push_back(row[c_id]);
    const long long h = parse_integer(row[c_h], where);
    const long long s = parse_integer(row[c_s], where);
    require(h >= 1 && s >= 0, ErrorCode::kParse, where + ": horizon must be >= 1 and sample >= 0");
    Date d;
    try {
      d = parse_date(row[c_date]);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, where + ": " + e.what());
    }
    const auto step = static_cast<std::size_t>(h - 1);
    const auto [it, inserted] = step_dates.emplace(step, d);
    require(inserted || it->second == d, ErrorCode::kAlignment,
            where + ": horizon " + std::to_string(h) + " maps to two different dates");
    cells.push_back({region, step, static_cast<std::size_t>(s), parse_real(row[c_v], where)});
    max_step = std::max(max_step, step);
    max_sample = std::max(max_sample, static_cast<std::size_t>(s));
  }
  const std::size_t n = f.region_ids.size(), m = max_step + 1, ns = max_sample + 1;
  require(cells.size() == n * m * ns, ErrorCode::kParse,
          path + ": incomplete sample grid (" + std::to_string(cells.size()) + " rows for " +
              std::to_string(n) + " regions x " + std::to_string(m) + " steps x " +
              std::to_string(ns) + " samples)");
  std::vector<double> values(n * m * ns);
  std::vector<char> filled(values.size(), 0);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& c = cells[k];
    const std::size_t idx = (c.region * m + c.step) * ns + c.sample;
    require(!filled[idx], ErrorCode::kParse, t.where(k) + ": duplicate sample row");
    filled[idx] = 1;
    values[idx] = c.value;
  }
  for (std::size_t h = 0; h < m; ++h) {
    require(step_dates.count(h) == 1, ErrorCode::kParse, path + ": missing horizon " + std::to_string(h + 1));
    f.dates.push_back(step_dates[h]);
  }
  f.samples = ForecastDistribution(n, m, ns, std::move(values));
  return f;
}

TruthTable read_truth(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_id = t.require_column("region_id");
  const std::size_t c_date = t.require_column("date");
  const std::size_t c_y = t.require_column("y");
  TruthTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Date d;
    try {
      d = parse_date(t.rows[r][c_date]);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, t.where(r) + ": " + e.what());
    }
    const auto [it, inserted] = out.emplace(std::make_pair(t.rows[r][c_id], d), parse_real(t.rows[r][c_y], t.where(r)));
    require(inserted, ErrorCode::kInvalidInput, t.where(r) + ": duplicate (region, date) key");
  }
  return out;
}

Eigen::MatrixXd align_truth(const ForecastFile& f, const TruthTable& truth) {
  Eigen::MatrixXd obs(static_cast<Eigen::Index>(f.region_ids.size()), static_cast<Eigen::Index>(f.dates.size()));
  for (std::size_t i = 0; i < f.region_ids.size(); ++i)
    for (std::size_t h = 0; h < f.dates.size(); ++h) {
      const auto it = truth.find({f.region_ids[i], f.dates[h]});
      if (it == truth.end())
        fail(ErrorCode::kAlignment, "no truth for region '" + f.region_ids[i] + "' on " +
                                        format_date(f.dates[h]) + " (horizon " + std::to_string(h + 1) + ")");
      obs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) = it->second;
    }
  return obs;
}

Evaluation evaluate_forecast(const ForecastFile& f, const Eigen::MatrixXd& observed) {
  Evaluation e;
  e.summary = score_forecast(f.samples, observed, f.region_ids);
  const auto& d = f.samples;
  for (std::size_t h = 0; h < d.horizon(); ++h) {
    std::vector<double> values;
    values.reserve(d.regions() * d.num_samples());
    for (std::size_t i = 0; i < d.regions(); ++i) {
      const auto s = d.samples(i, h);
      values.insert(values.end(), s.begin(), s.end());
    }
    const ForecastDistribution step(d.regions(), 1, d.num_samples(), std::move(values));
    e.by_horizon.push_back(score_forecast(step, observed.col(static_cast<Eigen::Index>(h)), f.region_ids).overall);
  }
  return e;
}

std::string scores_csv(const ScoreReport& r) {
  std::ostringstream os;
  os << "metric,level,value\n";
  report_rows(os, "", r);
  return os.str();
}

std::string scores_by_region_csv(const ScoreSummary& s) {
  std::ostringstream os;
  os << "region_id,metric,level,value\n";
  for (const auto& r : s.per_region) report_rows(os, r.region_id + ",", r.scores);
  return os.str();
}

std::string scores_long_csv(const std::string& model, const Evaluation& e) {
  std::ostringstream os;
  os << "model,horizon,metric,value\n";
  auto emit = [&](const std::string& horizon, const ScoreReport& r) {
    const std::string prefix = model + ',' + horizon + ',';
    os << prefix << "crps," << format_real(r.crps) << '\n';
    for (const auto& [l, v] : r.wql) os << prefix << "wql[" << level_text(l) << "]," << format_real(v) << '\n';
    for (const auto& [l, v] : r.coverage_interval)
      os << prefix << "coverage_interval[" << level_text(l) << "]," << format_real(v) << '\n';
    for (const auto& [l, v] : r.coverage_quantile)
      os << prefix << "coverage_quantile[" << level_text(l) << "]," << format_real(v) << '\n';
    os << prefix << "energy," << format_real(r.energy) << '\n';
  };
  for (std::size_t h = 0; h < e.by_horizon.size(); ++h) emit(std::to_string(h + 1), e.by_horizon[h]);
  emit("all", e.summary.overall);
  return os.str();
}

}  // namespace stoat
