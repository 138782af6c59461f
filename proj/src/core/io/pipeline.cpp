#include "pipeline.hpp"

#include <filesystem>

#include "../error.hpp"
#include "../metrics.hpp"
#include "../probmodel/model.hpp"
#include "../synth.hpp"
#include "artifacts.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "manifest.hpp"

namespace stoat {

namespace {

namespace fs = std::filesystem;

constexpr Stage kChain[] = {Stage::kBuildSpatial, Stage::kEstimate, Stage::kAdjust,
                            Stage::kTrain,        Stage::kForecast, Stage::kEvaluate};

struct Context {
  RunSettings s;
  fs::path out;

  std::string at(const std::string& name) const { return (out / name).string(); }

  Dataset dataset() const {
    return ingest(s.regions_path, s.panel_path, {s.post_onset, s.covariates});
  }

  std::size_t conditioning_length(const Panel& p) const {
    const std::size_t t = p.t();
    if (!s.holdout) return t;
    require(t > s.model.horizon + 1, ErrorCode::kInsufficientData,
            "holdout needs T > horizon + 1 (T=" + std::to_string(t) + ")");
    return t - s.model.horizon;
  }

  SpatialMatrix spatial(const Panel& p) const {
    auto sm = read_spatial_matrix(at("spatial_matrix.csv"), s.alpha);
    require(sm.region_ids() == p.region_ids, ErrorCode::kAlignment,
            "spatial_matrix.csv region order does not match regions.csv");
    return sm;
  }
};

StageReport build_spatial(const Context& c) {
  const auto regions = read_regions(c.s.regions_path);
  write_spatial_matrix(c.at("spatial_matrix.csv"), build_spatial_matrix(regions, c.s.alpha));
  return {stage_artifacts(Stage::kBuildSpatial), {}};
}

StageReport estimate(const Context& c) {
  const auto data = c.dataset();
  const auto sm = c.spatial(data.panel);
  Panel cond = panel_head(data.panel, c.conditioning_length(data.panel));
  const auto tt = TargetTransform::fit(c.s.target_transform, cond.y, cond.t());
  cond.y = tt.apply(cond.y);
  const auto est = estimate_did(cond, sm, c.s.estimation());
  write_did_estimate(c.at("did_estimate.csv"), est);
  write_text_file(c.at("did_report.txt"), format_report(est));
  write_target_transform(c.at("target_transform.csv"), data.panel.region_ids, tt);
  return {stage_artifacts(Stage::kEstimate), est.warnings};
}

StageReport adjust(const Context& c) {
  const auto data = c.dataset();
  const auto sm = c.spatial(data.panel);
  const auto est = read_did_estimate(c.at("did_estimate.csv"));
  const auto tt = read_target_transform(c.at("target_transform.csv"), data.panel.region_ids);
  Panel cond = panel_head(data.panel, c.conditioning_length(data.panel));
  cond.y = tt.apply(cond.y);
  DidEstimate used = est;
  if (c.s.no_spatial) used.rho = 0.0;
  const auto adj = adjust_panel(cond, sm, used);
  write_adjusted(c.at("adjusted_panel.csv"), {cond.region_ids, cond.times, cond.y, adj.y_tilde, adj.z});
  return {stage_artifacts(Stage::kAdjust), {}};
}

StageReport train_stage(const Context& c) {
  const auto a = read_adjusted(c.at("adjusted_panel.csv"));
  auto result = train(ForecastModel(c.s.model, a.region_ids), a.z, a.y);
  save_checkpoint(result.model, c.at(kCheckpointFile));
  write_loss_trace(c.at("loss_trace.csv"), result.loss_trace);
  return {stage_artifacts(Stage::kTrain), result.warnings};
}

StageReport forecast_stage(const Context& c) {
  const auto a = read_adjusted(c.at("adjusted_panel.csv"));
  const auto model = load_checkpoint(c.at(kCheckpointFile));
  require(model.region_ids() == a.region_ids, ErrorCode::kAlignment,
          "checkpoint regions do not match adjusted_panel.csv");
  const auto data = c.dataset();
  const auto tt = read_target_transform(c.at("target_transform.csv"), data.panel.region_ids);
  require(a.times.size() >= 2, ErrorCode::kInsufficientData, "forecast needs at least two periods");
  const std::size_t m = c.s.model.horizon;
  const auto raw = forecast(model, a.z, a.y, m, c.s.model.num_samples, c.s.model.seed);
  std::vector<double> values(raw.values().size());
  for (std::size_t i = 0; i < raw.regions(); ++i)
    for (std::size_t h = 0; h < m; ++h)
      for (std::size_t smp = 0; smp < raw.num_samples(); ++smp)
        values[(i * m + h) * raw.num_samples() + smp] = tt.inverse(i, raw.at(i, h, smp));
  ForecastFile f{a.region_ids, {}, ForecastDistribution(raw.regions(), m, raw.num_samples(), std::move(values))};
  const auto step = a.times[1] - a.times[0];
  for (std::size_t h = 1; h <= m; ++h) f.dates.push_back(a.times.back() + step * static_cast<int>(h));
  write_forecast_samples(c.at("forecast_samples.csv"), f);
  return {stage_artifacts(Stage::kForecast), {}};
}

StageReport evaluate_stage(const Context& c) {
  const auto f = read_forecast_samples(c.at("forecast_samples.csv"));
  const auto observed = align_truth(f, read_truth(c.s.panel_path));
  const auto e = evaluate_forecast(f, observed);
  write_text_file(c.at("scores.csv"), scores_csv(e.summary.overall));
  write_text_file(c.at("scores_by_region.csv"), scores_by_region_csv(e.summary));
  write_text_file(c.at("scores_long.csv"), scores_long_csv(c.s.model_label, e));
  return {stage_artifacts(Stage::kEvaluate), {}};
}

StageReport simulate_stage(const Context& c, const RunConfig& config) {
  const auto spec = generator_from(config);
  const auto data = generate(spec);
  write_regions(c.at("regions.csv"), data.regions);
  write_panel(c.at("panel.csv"), data.panel);
  write_ground_truth(c.at("ground_truth.csv"), data.truth);
  RunConfig next = config;
  next.set("regions", c.at("regions.csv"));
  next.set("panel", c.at("panel.csv"));
  next.set("post_onset_date", format_date(data.panel.times[spec.post_onset_index]));
  // Synthetic panels are already on the linear model scale.
  if (next.get("target_transform") == "log1p_standardize") next.set("target_transform", "none");
  write_text_file(c.at("simulate.cfg"), next.text());
  return {stage_artifacts(Stage::kSimulate), {}};
}

StageReport dispatch(Stage stage, const Context& c, const RunConfig& config) {
  switch (stage) {
    case Stage::kBuildSpatial: return build_spatial(c);
    case Stage::kEstimate: return estimate(c);
    case Stage::kAdjust: return adjust(c);
    case Stage::kTrain: return train_stage(c);
    case Stage::kForecast: return forecast_stage(c);
    case Stage::kEvaluate: return evaluate_stage(c);
    case Stage::kSimulate: return simulate_stage(c, config);
    case Stage::kPipeline: break;
  }
  fail(ErrorCode::kInternal, "dispatch: unexpected stage");
}

void mark_stale(Manifest& m, Stage failed) {
  bool downstream = false;
  std::vector<Stage> affected;
  if (failed == Stage::kSimulate) affected.push_back(failed);
  for (Stage s : kChain) {
    if (s == failed) downstream = true;
    if (downstream) affected.push_back(s);
  }
  for (Stage s : affected)
    for (const auto& name : stage_artifacts(s)) m.set("artifact." + name, "stale");
}

StageReport run_single(Stage stage, const RunConfig& config, const Context& c) {
  const std::string manifest_path = c.at(kManifestFile);
  Manifest m = Manifest::load_or_empty(manifest_path);
  m.erase_prefix("config.");
  for (const auto& [k, v] : config.values()) m.set("config." + k, v);
  m.set("seed", config.get("seed"));
  const std::string name = stage_name(stage);
  m.erase_prefix("note." + name + ".");
  m.erase_prefix("error." + name);
  try {
    StageReport r = dispatch(stage, c, config);
    m.set("stage." + name, "ok");
    for (const auto& a : r.artifacts) m.set("artifact." + a, "sha256:" + sha256_file(c.at(a)));
    for (std::size_t k = 0; k < r.notes.size(); ++k) m.set("note." + name + "." + std::to_string(k + 1), r.notes[k]);
    m.save(manifest_path);
    return r;
  } catch (const Error& e) {
    m.set("stage." + name, "failed");
    m.set("error." + name, e.what());
    mark_stale(m, stage);
    try {
      m.save(manifest_path);
    } catch (const Error&) {
    }
    throw Error(e.code(), "stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    m.set("stage." + name, "failed");
    m.set("error." + name, e.what());
    mark_stale(m, stage);
    try {
      m.save(manifest_path);
    } catch (const Error&) {
    }
    throw Error(ErrorCode::kInternal, "stage " + name + ": " + e.what());
  }
}

}  // namespace

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::kBuildSpatial, Stage::kEstimate, Stage::kAdjust, Stage::kTrain, Stage::kForecast,
                  Stage::kEvaluate, Stage::kSimulate, Stage::kPipeline})
    if (stage_name(s) == name) return s;
  fail(ErrorCode::kInvalidInput, "unknown stage '" + name + "'");
}

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::kBuildSpatial: return "build-spatial";
    case Stage::kEstimate: return "estimate";
    case Stage::kAdjust: return "adjust";
    case Stage::kTrain: return "train";
    case Stage::kForecast: return "forecast";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kSimulate: return "simulate";
    case Stage::kPipeline: return "pipeline";
  }
  return "pipeline";
}

const std::vector<std::string>& stage_artifacts(Stage stage) {
  static const std::vector<std::string> spatial{"spatial_matrix.csv"};
  static const std::vector<std::string> est{"did_estimate.csv", "did_report.txt", "target_transform.csv"};
  static const std::vector<std::string> adj{"adjusted_panel.csv"};
  static const std::vector<std::string> tr{kCheckpointFile, "loss_trace.csv"};
  static const std::vector<std::string> fc{"forecast_samples.csv"};
  static const std::vector<std::string> ev{"scores.csv", "scores_by_region.csv", "scores_long.csv"};
  static const std::vector<std::string> sim{"regions.csv", "panel.csv", "ground_truth.csv", "simulate.cfg"};
  static const std::vector<std::string> none;
  switch (stage) {
    case Stage::kBuildSpatial: return spatial;
    case Stage::kEstimate: return est;
    case Stage::kAdjust: return adj;
    case Stage::kTrain: return tr;
    case Stage::kForecast: return fc;
    case Stage::kEvaluate: return ev;
    case Stage::kSimulate: return sim;
    case Stage::kPipeline: return none;
  }
  return none;
}

StageReport run_stage(Stage stage, const RunConfig& config) {
  Context c{settings_from(config), fs::path(config.get("out"))};
  std::error_code ec;
  fs::create_directories(c.out, ec);
  require(!ec, ErrorCode::kIo, "cannot create output directory '" + c.out.string() + "': " + ec.message());
  if (stage != Stage::kPipeline) return run_single(stage, config, c);
  StageReport all;
  for (Stage s : kChain) {
    if (s == Stage::kEvaluate && !c.s.holdout) break;
    auto r = run_single(s, config, c);
    all.artifacts.insert(all.artifacts.end(), r.artifacts.begin(), r.artifacts.end());
    for (auto& n : r.notes) all.notes.push_back(stage_name(s) + ": " + n);
  }
  return all;
}

}  // namespace stoat
