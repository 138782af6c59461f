// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "causal.hpp"
#include "error.hpp"
#include "io/config.hpp"
#include "io/csv.hpp"
#include "io/pipeline.hpp"
#include "metrics.hpp"
#include "probmodel/model.hpp"
#include "spatial.hpp"
#include "synth.hpp"

using namespace stoat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path g_scratch;

// ---------------------------------------------------------------------------

Outcome estimator_recovery() {
  const int reps = 200;
  std::vector<std::string> names;
  std::vector<int> hits;
  for (int rep = 0; rep < reps; ++rep) {
    GeneratorSpec spec;
    spec.n_regions = 6;
    spec.t_steps = 300;
    spec.noise_sigma = 0.1;
    spec.seed = 1000 + static_cast<std::uint64_t>(rep);
    const auto data = generate(spec);
    const auto est = estimate_did(data.panel, data.spatial);
    std::vector<std::pair<std::string, bool>> checks;
    checks.emplace_back("rho", std::abs(est.rho - data.truth.rho) <= 3 * est.rho_se);
    checks.emplace_back("delta", std::abs(est.delta - data.truth.delta) <= 3 * est.delta_se);
    for (Eigen::Index k = 0; k < est.gamma.size(); ++k)
      checks.emplace_back("gamma_" + est.covariate_names[static_cast<std::size_t>(k)],
                          std::abs(est.gamma(k) - data.truth.gamma(k)) <= 3 * est.gamma_se(k));
    if (names.empty()) {
      for (const auto& c : checks) names.push_back(c.first);
      hits.assign(names.size(), 0);
    }
    for (std::size_t k = 0; k < checks.size(); ++k) hits[k] += checks[k].second;
  }
  Outcome o{true, ""};
  for (std::size_t k = 0; k < names.size(); ++k) {
    const double rate = static_cast<double>(hits[k]) / reps;
    o.pass = o.pass && rate >= 0.95;
    o.detail += names[k] + " " + fmt("%.3f", rate) + " ";
  }
  return o;
}

Outcome exact_recovery() {
  GeneratorSpec spec;
  spec.noise_sigma = 0.0;
  spec.seed = 42;
  const auto data = generate(spec);
  const auto est = estimate_did(data.panel, data.spatial);
  const auto got = est.coefficients();
  const auto truth = data.truth.coefficients();
  double worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k)
    worst = std::max(worst, std::abs(got[k].estimate - truth[k].estimate));
  return {got.size() == truth.size() && worst < 1e-8,
          std::to_string(got.size()) + " coefficients, max error " + fmt("%.2e", worst)};
}

Outcome gradient_check() {
  double worst = 0.0;
  std::size_t checked = 0;
  for (auto fam : {Family::kGaussian, Family::kLaplace, Family::kStudentT}) {
    ModelConfig c;
    c.hidden_size = 6;
    c.num_layers = 2;
    c.context_len = 8;
    c.horizon = 3;
    c.distribution = fam;
    ForecastModel m(c, {"a", "b"});
    std::mt19937_64 rng(17 + static_cast<std::uint64_t>(fam));
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index k = 0; k < m.parameters().size(); ++k) m.parameters()(k) = 0.5 * g(rng);

    const Eigen::Index head = m.block("head.w").offset;
    const Eigen::Index total = m.parameters().size();
    for (int input = 0; input < 10; ++input) {
      const std::size_t len = c.context_len + c.horizon + 2;
      ScaledSeries s{Eigen::MatrixXd(2, len), Eigen::MatrixXd(2, len)};
      for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(len); ++t) {
          s.z(i, t) = g(rng);
          s.y(i, t) = g(rng);
        }
      const Window w{static_cast<std::size_t>(input % 2), static_cast<std::size_t>(input % 3)};
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(total);
      window_loss(m, s, w, &grad);
      std::uniform_int_distribution<Eigen::Index> enc(0, head - 1), hd(head, total - 1);
      for (int p = 0; p < 50; ++p) {
        const Eigen::Index j = p % 2 ? hd(rng) : enc(rng);
        const double orig = m.parameters()(j);
        m.parameters()(j) = orig + 1e-5;
        const double up = window_loss(m, s, w);
        m.parameters()(j) = orig - 1e-5;
        const double dn = window_loss(m, s, w);
        m.parameters()(j) = orig;
        const double fd = (up - dn) / 2e-5;
        worst = std::max(worst, std::abs(fd - grad(j)) /
                                    std::max({std::abs(fd), std::abs(grad(j)), 1e-5}));
        ++checked;
      }
    }
  }
  return {worst < 1e-4, std::to_string(checked) + " partials, max rel error " + fmt("%.2e", worst)};
}

double integrate(const std::function<double(double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(),
                                              std::numeric_limits<double>::infinity(), 15, 1e-12);
}

Outcome likelihood_oracles() {
  const double gauss = nll({Family::kGaussian, 0.0, 1.0, 0.0}, 0.0);
  const double e1 = std::abs(gauss - 0.5 * std::log(2 * std::numbers::pi));
  const double lap = integrate([](double y) { return density({Family::kLaplace, 0.3, 0.7, 0.0}, y); });
  const double st = integrate([](double y) { return density({Family::kStudentT, -0.2, 1.3, 3.0}, y); });
  double e4 = 0.0;
  for (double y : {-3.0, -1.0, 0.0, 0.5, 2.0})
    e4 = std::max(e4, std::abs(nll({Family::kStudentT, 0.0, 1.0, 1e6}, y) -
                               nll({Family::kGaussian, 0.0, 1.0, 0.0}, y)));
  const bool pass = e1 <= 1e-9 && std::abs(lap - 1) <= 1e-4 && std::abs(st - 1) <= 1e-4 && e4 < 1e-3;
  return {pass, "gaussian mode err " + fmt("%.1e", e1) + ", laplace mass " + fmt("%.8f", lap) +
                    ", student-t mass " + fmt("%.8f", st) + ", t(1e6) vs gaussian " + fmt("%.1e", e4)};
}

Outcome crps_oracle() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = g(rng);
  // Observation at the mode: the estimator's Monte Carlo sd is about 7e-4 here
  // and exceeds 2e-3 once |y| >= 1.
  const double closed = 2 / std::sqrt(2 * std::numbers::pi) - 1 / std::sqrt(std::numbers::pi);
  const double worst = std::abs(crps_from_samples(draws, 0.0) - closed);
  std::vector<double> small(draws.begin(), draws.begin() + 1000);
  Eigen::MatrixXd paths = Eigen::Map<Eigen::VectorXd>(small.data(), 1000);
  double es_gap = 0.0;
  for (double y : {-0.4, 1.1}) {
    Eigen::VectorXd obs(1);
    obs << y;
    es_gap = std::max(es_gap, std::abs(energy_score(paths, obs) - crps_from_samples(small, y)));
  }
  return {worst < 0.002 && es_gap <= 1e-12,
          "sample vs closed form " + fmt("%.2e", worst) + ", energy vs crps " + fmt("%.1e", es_gap)};
}

Outcome calibration() {
  const std::size_t cells = 10000, n = 1000;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> mu(-5, 5), sigma(0.2, 3);
  std::string detail;
  bool pass = true;
  for (auto fam : {Family::kGaussian, Family::kLaplace, Family::kStudentT}) {
    std::vector<double> values(cells * n);
    Eigen::MatrixXd truth(static_cast<Eigen::Index>(cells), 1);
    for (std::size_t c = 0; c < cells; ++c) {
      const DistributionParams p{fam, mu(rng), sigma(rng), 5.0};
      for (std::size_t k = 0; k < n; ++k) values[c * n + k] = draw(p, rng);
      truth(static_cast<Eigen::Index>(c), 0) = draw(p, rng);
    }
    const ForecastDistribution f(cells, 1, n, std::move(values));
    const double cov = coverage(quantiles_of(f), truth, 0.1);
    pass = pass && std::abs(cov - 0.9) <= 0.02;
    detail += family_name(fam) + " " + fmt("%.4f", cov) + " ";
  }
  return {pass, detail + "(nominal 0.9)"};
}

Outcome spatial_invariants() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> lat(-85, 85), lon(-180, 180);
  std::uniform_int_distribution<int> size(2, 30);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Region> rs;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) rs.push_back({"r" + std::to_string(i), {lat(rng), lon(rng)}, false});
    const RegionSet regions(rs);
    const auto lo = build_spatial_matrix(regions, 0.5);
    const auto mid = build_spatial_matrix(regions, 1.0);
    const auto hi = build_spatial_matrix(regions, 3.0);
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (const auto* s : {&lo, &mid, &hi}) {
        ok = ok && std::abs(s->weights().row(i).sum() - 1.0) <= 1e-12 && s->weights()(i, i) == 0.0;
      }
      const double a = lo.weights().row(i).maxCoeff();
      const double b = mid.weights().row(i).maxCoeff();
      const double c = hi.weights().row(i).maxCoeff();
      ok = ok && b >= a - 1e-15 && c >= b - 1e-15;
    }
    bad += !ok;
  }
  return {bad == 0, "1000 geometries, " + std::to_string(bad) + " violations"};
}

// ---------------------------------------------------------------------------

RunConfig small_run(const fs::path& out, std::uint64_t seed) {
  RunConfig c;
  c.set("out", out.string());
  c.set("seed", std::to_string(seed));
  c.set("sim.n_regions", "6");
  c.set("sim.t_steps", "160");
  c.set("sim.post_onset_index", "80");
  c.set("context_len", "20");
  c.set("horizon", "4");
  c.set("hidden_size", "8");
  c.set("epochs", "10");
  c.set("batch_size", "16");
  c.set("window_stride", "2");
  c.set("num_samples", "100");
  return c;
}

RunConfig simulated(const RunConfig& base) {
  run_stage(Stage::kSimulate, base);
  return RunConfig::load((fs::path(base.get("out")) / "simulate.cfg").string());
}

double read_crps(const fs::path& dir) {
  const auto table = read_csv((dir / "scores.csv").string());
  for (const auto& row : table.rows)
    if (row[0] == "crps") return parse_real(row[2], "crps");
  throw Error(ErrorCode::kParse, "no crps row in " + (dir / "scores.csv").string());
}

Outcome ablation_direction() {
  const int seeds = 20;
  double full = 0, nosp = 0, nofac = 0;
  int wins_sp = 0, wins_fac = 0;
  std::vector<double> d_sp, d_fac;
  for (int k = 0; k < seeds; ++k) {
    const fs::path dir = g_scratch / ("ablation-" + std::to_string(k));
    auto base = small_run(dir, static_cast<std::uint64_t>(k));
    base.set("sim.rho", "0.5");
    base.set("sim.delta", "-3");
    base.set("sim.noise_sigma", "0.1");
    base.set("sim.persistence", "0.5");
    base.set("alpha", "4");
    const auto cfg = simulated(base);
    double crps[3];
    int v = 0;
    for (auto [sp, fac] : {std::pair{false, false}, {true, false}, {false, true}}) {
      auto c = cfg;
      c.set("no_spatial", sp ? "true" : "false");
      c.set("no_factors", fac ? "true" : "false");
      const fs::path out = dir / ("variant-" + std::to_string(v));
      c.set("out", out.string());
      run_stage(Stage::kPipeline, c);
      crps[v++] = read_crps(out);
    }
    full += crps[0];
    nosp += crps[1];
    nofac += crps[2];
    wins_sp += crps[0] <= crps[1];
    wins_fac += crps[0] <= crps[2];
    d_sp.push_back(crps[1] - crps[0]);
    d_fac.push_back(crps[2] - crps[0]);
  }
  full /= seeds;
  nosp /= seeds;
  nofac /= seeds;
  auto effect = [](const std::vector<double>& d) {
    double m = 0, v = 0;
    for (double x : d) m += x;
    m /= static_cast<double>(d.size());
    for (double x : d) v += (x - m) * (x - m);
    v /= static_cast<double>(d.size() - 1);
    return v > 0 ? m / std::sqrt(v) : 0.0;
  };
  return {full <= nosp && full <= nofac,
          "mean crps full " + fmt("%.4f", full) + ", no_spatial " + fmt("%.4f", nosp) +
              " (diff " + fmt("%+.4f", nosp - full) + ", d=" + fmt("%.2f", effect(d_sp)) + ", full wins " +
              std::to_string(wins_sp) + "/20), no_factors " + fmt("%.4f", nofac) + " (diff " +
              fmt("%+.4f", nofac - full) + ", d=" + fmt("%.2f", effect(d_fac)) + ", full wins " +
              std::to_string(wins_fac) + "/20)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome e2e_determinism() {
  std::vector<fs::path> dirs;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = g_scratch / ("determinism-" + std::to_string(run));
    fs::remove_all(dir);
    run_stage(Stage::kPipeline, simulated(small_run(dir, 7)));
    dirs.push_back(dir);
  }
  const std::vector<std::string> files{"forecast_samples.csv", "scores.csv", "scores_by_region.csv",
                                       "scores_long.csv", "model.ckpt", "did_estimate.csv",
                                       "adjusted_panel.csv", "loss_trace.csv"};
  std::string differ;
  for (const auto& f : files) {
    const auto a = slurp(dirs[0] / f);
    if (a.empty() || a != slurp(dirs[1] / f)) differ += " " + f;
  }
  return {differ.empty(), differ.empty() ? std::to_string(files.size()) + " artifacts byte-identical"
                                         : "differ:" + differ};
}

Outcome checkpoint_round_trip() {
  GeneratorSpec spec;
  spec.n_regions = 4;
  spec.t_steps = 120;
  spec.post_onset_index = 60;
  spec.seed = 3;
  const auto data = generate(spec);
  const auto est = estimate_did(data.panel, data.spatial);
  const auto adj = adjust_panel(data.panel, data.spatial, est);
  ModelConfig c;
  c.hidden_size = 8;
  c.context_len = 20;
  c.horizon = 4;
  c.epochs = 3;
  c.distribution = Family::kStudentT;
  auto trained = train(ForecastModel(c, data.regions.ids()), adj, data.panel).model;
  const fs::path path = g_scratch / "roundtrip.ckpt";
  save_checkpoint(trained, path.string());
  const auto loaded = load_checkpoint(path.string());
  const auto a = forecast(trained, adj.z, data.panel.y, 4, 200, 11);
  const auto b = forecast(loaded, adj.z, data.panel.y, 4, 200, 11);
  const bool params = trained.parameters() == loaded.parameters();
  const bool same = a.values().size() == b.values().size() &&
                    std::equal(a.values().begin(), a.values().end(), b.values().begin(),
                               [](double x, double y) { return std::bit_cast<std::uint64_t>(x) ==
                                                               std::bit_cast<std::uint64_t>(y); });
  return {params && same, std::to_string(a.values().size()) + " draws compared bitwise"};
}

}  // namespace

// Usage: acceptance [scratch-dir] [--known-failure NAME]...
// A known failure still prints FAIL but does not set the exit status.
int main(int argc, char** argv) {
  std::vector<std::string> known;
  g_scratch = fs::temp_directory_path() / "stoat-acceptance";
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--known-failure" && k + 1 < argc)
      known.emplace_back(argv[++k]);
    else
      g_scratch = arg;
  }
  fs::create_directories(g_scratch);

  struct Criterion {
    const char* name;
    Outcome (*run)();
    double limit_s;  // 0: no runtime bound
  };
  const Criterion criteria[] = {
      {"estimator-recovery", estimator_recovery, 120},
      {"exact-recovery", exact_recovery, 0},
      {"gradient-check", gradient_check, 60},
      {"likelihood-oracles", likelihood_oracles, 0},
      {"crps-oracle", crps_oracle, 0},
      {"calibration", calibration, 0},
      {"spatial-invariants", spatial_invariants, 0},
      {"ablation-direction", ablation_direction, 0},
      {"e2e-determinism", e2e_determinism, 0},
      {"checkpoint-round-trip", checkpoint_round_trip, 0},
  };

  int failed = 0, unexcused = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) {
      o.pass = false;
      o.detail += " [over " + fmt("%.0f", c.limit_s) + " s budget]";
    }
    const bool excused = std::find(known.begin(), known.end(), c.name) != known.end();
    failed += !o.pass;
    unexcused += !o.pass && !excused;
    std::printf("%s  %-22s %s (%.2f s)%s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                !o.pass && excused ? " [known failure]" : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return unexcused ? 1 : 0;
}
