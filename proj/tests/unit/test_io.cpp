#include <doctest.h>

#include <filesystem>

#include "error.hpp"
#include "io/artifacts.hpp"
#include "io/config.hpp"
#include "io/csv.hpp"
#include "io/dataset.hpp"
#include "io/manifest.hpp"
#include "io/pipeline.hpp"
#include "synth.hpp"

using namespace stoat;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(STOAT_TEST_DATA) + "/" + name; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stoat_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Returns the error raised by ingesting `panel` (with the good regions file).
Error ingest_error(const std::string& panel, const std::string& regions = "regions.csv",
                   IngestOptions opt = {}) {
  try {
    ingest(data(regions), data(panel), opt);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected ingestion to fail for " << panel);
  return Error(ErrorCode::kOk, "");
}

}  // namespace

TEST_CASE("well-formed fixture ingests") {
  const auto d = ingest(data("regions.csv"), data("panel.csv"), {parse_date("2021-01-06"), {}});
  CHECK(d.panel.n() == 2);
  CHECK(d.panel.t() == 10);
  CHECK(d.panel.d() == 2);
  CHECK(d.panel.covariate_names[1] == "vaccination");
  CHECK(d.panel.treated == std::vector<int>{1, 0});
  CHECK(d.panel.post[4] == 0);
  CHECK(d.panel.post[5] == 1);
  CHECK(d.panel.y(1, 3) == doctest::Approx(2.3));
  const auto only = ingest(data("regions.csv"), data("panel.csv"), {std::nullopt, {"mobility"}});
  CHECK(only.panel.d() == 1);
}

TEST_CASE("every malformed fixture yields its own diagnostic") {
  struct Case {
    const char* panel;
    const char* regions;
    ErrorCode code;
    const char* needle;
  };
  const Case cases[] = {
      {"bad_duplicate.csv", "regions.csv", ErrorCode::kInvalidInput, "duplicate (region, date)"},
      {"bad_unknown_region.csv", "regions.csv", ErrorCode::kInvalidInput, "unknown region 'Z'"},
      {"bad_nonmonotone.csv", "regions.csv", ErrorCode::kInvalidInput, "non-monotone dates"},
      {"bad_gap.csv", "regions.csv", ErrorCode::kInvalidInput, "gap in dates"},
      {"bad_nan.csv", "regions.csv", ErrorCode::kInvalidInput, "non-finite value"},
      {"bad_field_count.csv", "regions.csv", ErrorCode::kParse, "expected 5 fields"},
      {"bad_date.csv", "regions.csv", ErrorCode::kParse, "invalid calendar date"},
      {"bad_misaligned.csv", "regions.csv", ErrorCode::kAlignment, "do not match"},
      {"panel.csv", "bad_regions_duplicate.csv", ErrorCode::kInvalidInput, "duplicate region"},
      {"panel.csv", "bad_regions_latitude.csv", ErrorCode::kInvalidInput, "lat"},
      {"panel.csv", "bad_regions_treated.csv", ErrorCode::kInvalidInput, "treated must be 0 or 1"},
  };
  for (const auto& c : cases) {
    const Error e = ingest_error(c.panel, c.regions);
    const std::string message = e.what();
    CAPTURE(message);
    CHECK(e.code() == c.code);
    CHECK(message.find(c.needle) != std::string::npos);
  }
  const Error missing = ingest_error("bad_missing_covariate.csv", "regions.csv", {std::nullopt, {"mobility", "vaccination"}});
  CHECK(std::string(missing.what()).find("missing covariate column 'vaccination'") != std::string::npos);
  const Error dup = ingest_error("bad_duplicate.csv");
  CHECK(std::string(dup.what()).find("bad_duplicate.csv") != std::string::npos);
  CHECK(std::string(dup.what()).find(":6:") != std::string::npos);
  const Error nan = ingest_error("bad_nan.csv");
  CHECK(std::string(nan.what()).find(":8") != std::string::npos);
}

TEST_CASE("synthetic panel survives a CSV round trip") {
  const auto dir = scratch("roundtrip");
  GeneratorSpec spec;
  spec.t_steps = 40;
  spec.post_onset_index = 20;
  const auto gen = generate(spec);
  write_regions((dir / "regions.csv").string(), gen.regions);
  write_panel((dir / "panel.csv").string(), gen.panel);
  const auto back = ingest((dir / "regions.csv").string(), (dir / "panel.csv").string(),
                           {gen.panel.times[20], {}});
  CHECK(back.panel.region_ids == gen.panel.region_ids);
  CHECK(back.panel.times == gen.panel.times);
  CHECK(back.panel.post == gen.panel.post);
  CHECK(back.panel.treated == gen.panel.treated);
  CHECK((back.panel.y - gen.panel.y).cwiseAbs().maxCoeff() < 1e-10);
  for (std::size_t k = 0; k < gen.panel.d(); ++k)
    CHECK((back.panel.covariates[k] - gen.panel.covariates[k]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("numbers round-trip exactly through text") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 123456789.123456789})
    CHECK(parse_real(format_real(v), "t") == v);
  CHECK_THROWS_AS(parse_real("1.5x", "t"), Error);
  CHECK_THROWS_AS(parse_real("", "t"), Error);
}

TEST_CASE("config parsing, overrides and defaults") {
  const auto cfg = RunConfig::parse("# comment\nhorizon = 5\ncontext_len=25\nno_spatial=true\n");
  CHECK(cfg.get("horizon") == "5");
  CHECK(cfg.flag("no_spatial"));
  CHECK(cfg.get("distribution") == "gaussian");
  const auto s = settings_from(cfg);
  CHECK(s.model.horizon == 5);
  CHECK(s.model_label == "gaussian-no_spatial");
  CHECK_FALSE(s.estimation().design.include_spatial);
  CHECK_THROWS_AS(RunConfig::parse("bogus_key=1\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("horizon\n"), Error);
  RunConfig c;
  c.set("distribution", "cauchy");
  CHECK_THROWS_AS(settings_from(c), Error);
  for (const auto& k : config_keys()) CHECK_FALSE(k.description.empty());
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("malformed sample file reports the line") {
  try {
    read_forecast_samples(data("bad_samples.csv"));
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("bad_samples.csv:3") != std::string::npos);
  }
}

TEST_CASE("evaluate: perfect forecast and horizon mismatch") {
  const auto dir = scratch("evaluate");
  ForecastFile f{{"A", "B"}, {parse_date("2021-01-09"), parse_date("2021-01-10")}, {}};
  const auto truth = read_truth(data("panel.csv"));
  std::vector<double> values;
  for (const auto& id : f.region_ids)
    for (const auto& d : f.dates)
      for (int s = 0; s < 3; ++s) values.push_back(truth.at({id, d}));
  f.samples = ForecastDistribution(2, 2, 3, values);
  write_forecast_samples((dir / "f.csv").string(), f);
  const auto back = read_forecast_samples((dir / "f.csv").string());
  CHECK(back.samples.values() == f.samples.values());
  const auto e = evaluate_forecast(back, align_truth(back, truth));
  CHECK(e.summary.overall.crps == 0.0);
  CHECK(e.summary.overall.energy == 0.0);
  CHECK(e.summary.overall.wql.at(0.5) == 0.0);
  CHECK(e.by_horizon.size() == 2);
  const std::string csv = scores_csv(e.summary.overall);
  for (const char* row : {"crps,,0", "wql,0.1,0", "wql,0.5,0", "wql,0.9,0", "coverage_interval,0.1,1",
                          "coverage_quantile,0.9,1", "energy,,0"})
    CHECK(csv.find(row) != std::string::npos);
  CHECK(scores_long_csv("m", e).find("m,all,crps,0") != std::string::npos);

  f.dates = {parse_date("2021-01-10"), parse_date("2021-01-11")};
  try {
    align_truth(f, truth);
    FAIL("expected alignment error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kAlignment);
  }
}

TEST_CASE("did estimate and spatial matrix artifacts round trip") {
  const auto dir = scratch("artifacts");
  const auto gen = generate(GeneratorSpec{});
  const auto est = estimate_did(gen.panel, gen.spatial);
  write_did_estimate((dir / "d.csv").string(), est);
  const auto back = read_did_estimate((dir / "d.csv").string());
  CHECK(back.rho == est.rho);
  CHECK(back.delta_se == est.delta_se);
  CHECK(back.gamma == est.gamma);
  CHECK(back.covariate_names == est.covariate_names);
  write_spatial_matrix((dir / "s.csv").string(), gen.spatial);
  CHECK(read_spatial_matrix((dir / "s.csv").string(), 1.0).weights() == gen.spatial.weights());
}

TEST_CASE("stage failure names the stage and marks artifacts stale") {
  const auto dir = scratch("stale");
  RunConfig c;
  c.set("regions", data("regions.csv"));
  c.set("panel", data("panel.csv"));
  c.set("out", dir.string());
  c.set("horizon", "2");
  c.set("context_len", "3");
  c.set("target_transform", "standardize");
  run_stage(Stage::kBuildSpatial, c);
  auto m = Manifest::load_or_empty((dir / kManifestFile).string());
  CHECK(m.get("stage.build-spatial") == "ok");
  CHECK(m.get("artifact.spatial_matrix.csv").rfind("sha256:", 0) == 0);
  c.set("panel", data("bad_gap.csv"));
  try {
    run_stage(Stage::kEstimate, c);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("stage estimate:", 0) == 0);
  }
  m = Manifest::load_or_empty((dir / kManifestFile).string());
  CHECK(m.get("stage.estimate") == "failed");
  CHECK(m.get("artifact.did_estimate.csv") == "stale");
  CHECK(m.get("artifact.forecast_samples.csv") == "stale");
  CHECK(m.get("artifact.spatial_matrix.csv").rfind("sha256:", 0) == 0);
}

TEST_CASE("pipeline on a synthetic panel writes every artifact") {
  const auto dir = scratch("pipeline");
  RunConfig c;
  c.set("out", dir.string());
  c.set("sim.t_steps", "120");
  c.set("sim.post_onset_index", "60");
  c.set("sim.n_regions", "4");
  c.set("horizon", "5");
  c.set("context_len", "25");
  c.set("hidden_size", "4");
  c.set("epochs", "2");
  c.set("window_stride", "5");
  c.set("num_samples", "20");
  run_stage(Stage::kSimulate, c);
  const auto cfg = RunConfig::load((dir / "simulate.cfg").string());
  CHECK(cfg.get("target_transform") == "none");
  run_stage(Stage::kPipeline, cfg);
  for (const auto& stage : {Stage::kBuildSpatial, Stage::kEstimate, Stage::kAdjust, Stage::kTrain, Stage::kForecast,
                            Stage::kEvaluate})
    for (const auto& a : stage_artifacts(stage)) CHECK(fs::exists(dir / a));
  const auto scores = read_text_file((dir / "scores.csv").string());
  for (const char* metric : {"crps", "wql,0.1", "wql,0.5", "wql,0.9", "coverage_interval", "coverage_quantile", "energy"})
    CHECK(scores.find(metric) != std::string::npos);
  const auto f = read_forecast_samples((dir / "forecast_samples.csv").string());
  CHECK(f.samples.horizon() == 5);
  CHECK(f.samples.num_samples() == 20);
  CHECK(f.dates.front() == parse_date("2020-03-01") + std::chrono::days(115));

  RunConfig ab = cfg;
  const auto dir2 = scratch("pipeline_ablation");
  ab.set("out", dir2.string());
  ab.set("no_spatial", "true");
  run_stage(Stage::kBuildSpatial, ab);
  run_stage(Stage::kEstimate, ab);
  run_stage(Stage::kAdjust, ab);
  CHECK(read_did_estimate((dir2 / "did_estimate.csv").string()).rho == 0.0);
  const auto adj = read_adjusted((dir2 / "adjusted_panel.csv").string());
  CHECK(adj.z == adj.y_tilde);
}
