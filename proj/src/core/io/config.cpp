#include "config.hpp"

#include <charconv>
#include <sstream>

#include "../error.hpp"
#include "csv.hpp"

namespace stoat {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"regions", "regions.csv", "region table: region_id,lat,lon,treated"},
      {"panel", "panel.csv", "panel table: region_id,date,y,<covariates...>"},
      {"out", "out", "output directory for artifacts"},
      {"post_onset_date", "", "first post-intervention date (YYYY-MM-DD); empty = no post period"},
      {"covariates", "", "comma-separated covariate columns to use; empty = all extra columns"},
      {"alpha", "1", "inverse-distance decay exponent"},
      {"no_spatial", "false", "ablation: drop the spatial term (rho := 0, z = y_tilde)"},
      {"no_factors", "false", "ablation: drop the covariate columns"},
      {"instruments", "spatial", "rho instruments: spatial | self"},
      {"target_transform", "log1p_standardize", "none | standardize | log1p_standardize"},
      {"holdout", "true", "hold out the last `horizon` periods as evaluation truth"},
      {"model_label", "", "model name in scores_long.csv; empty = derived from family and ablations"},
      {"distribution", "gaussian", "gaussian | laplace | student_t"},
      {"hidden_size", "16", "GRU hidden units"},
      {"num_layers", "1", "stacked GRU layers"},
      {"context_len", "50", "encoder context length"},
      {"horizon", "10", "forecast horizon"},
      {"learning_rate", "0.01", "SGD learning rate"},
      {"epochs", "20", "training epochs"},
      {"grad_clip", "5", "global gradient-norm clip"},
      {"momentum", "0.9", "SGD momentum"},
      {"batch_size", "32", "windows per update"},
      {"window_stride", "1", "offset between consecutive training windows"},
      {"num_samples", "100", "forecast sample paths"},
      {"seed", "0", "run seed (training, shuffling, sampling)"},
      {"sim.n_regions", "6", "simulate: number of regions"},
      {"sim.t_steps", "300", "simulate: retained periods"},
      {"sim.rho", "0.4", "simulate: spatial autoregressive coefficient"},
      {"sim.beta0", "1", "simulate: intercept"},
      {"sim.beta1", "0.5", "simulate: treated-group effect"},
      {"sim.beta2", "0.3", "simulate: post-period effect"},
      {"sim.delta", "-2", "simulate: treatment effect"},
      {"sim.gamma", "1,-0.5,-1,0.3", "simulate: covariate coefficients"},
      {"sim.treated_fraction", "0.5", "simulate: share of treated regions"},
      {"sim.post_onset_index", "150", "simulate: first post period (0-based)"},
      {"sim.persistence", "0.9", "simulate: covariate AR(1) persistence"},
      {"sim.covariate_noise", "1", "simulate: covariate innovation scale"},
      {"sim.noise_sigma", "0.1", "simulate: outcome noise scale"},
      {"sim.noise_family", "gaussian", "simulate: gaussian | student_t"},
      {"sim.noise_df", "4", "simulate: student-t degrees of freedom"},
      {"sim.burn_in", "50", "simulate: discarded initial periods"},
      {"sim.start_date", "2020-03-01", "simulate: first retained date"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    require(eq != std::string::npos, ErrorCode::kParse, where + ": expected key=value");
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(e.code(), where + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) { return parse(read_text_file(path), path); }

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::kInvalidInput, "unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::kInvalidInput, "unknown config key '" + key + "'");
  return it->second;
}

std::string RunConfig::text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << '=' << v << '\n';
  return os.str();
}

double RunConfig::real(const std::string& key) const { return parse_real(get(key), "config " + key); }

std::uint64_t RunConfig::integer(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  require(!v.empty() && res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse,
          "config " + key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::kParse, "config " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  const std::string& v = get(key);
  if (trim(v).empty()) return out;
  for (const auto& item : split_csv_line(v)) out.push_back(trim(item));
  return out;
}

EstimationOptions RunSettings::estimation() const {
  EstimationOptions o;
  o.design.include_spatial = !no_spatial;
  o.design.include_covariates = !no_factors;
  o.instruments = instruments;
  return o;
}

RunSettings settings_from(const RunConfig& c) {
  RunSettings s;
  s.regions_path = c.get("regions");
  s.panel_path = c.get("panel");
  s.out_dir = c.get("out");
  if (!c.get("post_onset_date").empty()) s.post_onset = parse_date(c.get("post_onset_date"));
  s.covariates = c.list("covariates");
  s.alpha = c.real("alpha");
  s.no_spatial = c.flag("no_spatial");
  s.no_factors = c.flag("no_factors");
  s.holdout = c.flag("holdout");
  const std::string& inst = c.get("instruments");
  if (inst == "spatial")
    s.instruments = InstrumentSet::kSpatial;
  else if (inst == "self")
    s.instruments = InstrumentSet::kSelf;
  else
    fail(ErrorCode::kInvalidInput, "config instruments: expected spatial or self, got '" + inst + "'");
  s.target_transform = parse_target_transform(c.get("target_transform"));

  ModelConfig& m = s.model;
  m.distribution = parse_family(c.get("distribution"));
  m.hidden_size = c.integer("hidden_size");
  m.num_layers = c.integer("num_layers");
  m.context_len = c.integer("context_len");
  m.horizon = c.integer("horizon");
  m.learning_rate = c.real("learning_rate");
  m.epochs = c.integer("epochs");
  m.grad_clip = c.real("grad_clip");
  m.momentum = c.real("momentum");
  m.batch_size = c.integer("batch_size");
  m.window_stride = c.integer("window_stride");
  m.num_samples = c.integer("num_samples");
  m.seed = c.integer("seed");
  m.validate();

  s.model_label = c.get("model_label");
  if (s.model_label.empty()) {
    s.model_label = family_name(m.distribution);
    if (s.no_spatial) s.model_label += "-no_spatial";
    if (s.no_factors) s.model_label += "-no_factors";
  }
  return s;
}

GeneratorSpec generator_from(const RunConfig& c) {
  GeneratorSpec g;
  g.n_regions = c.integer("sim.n_regions");
  g.t_steps = c.integer("sim.t_steps");
  g.alpha = c.real("alpha");
  g.rho = c.real("sim.rho");
  g.beta0 = c.real("sim.beta0");
  g.beta1 = c.real("sim.beta1");
  g.beta2 = c.real("sim.beta2");
  g.delta = c.real("sim.delta");
  g.gamma.clear();
  for (const auto& v : c.list("sim.gamma")) g.gamma.push_back(parse_real(v, "config sim.gamma"));
  g.treated_fraction = c.real("sim.treated_fraction");
  g.post_onset_index = c.integer("sim.post_onset_index");
  g.covariate_persistence = c.real("sim.persistence");
  g.covariate_noise = c.real("sim.covariate_noise");
  g.noise_sigma = c.real("sim.noise_sigma");
  const std::string& fam = c.get("sim.noise_family");
  if (fam == "gaussian")
    g.noise_family = NoiseFamily::kGaussian;
  else if (fam == "student_t")
    g.noise_family = NoiseFamily::kStudentT;
  else
    fail(ErrorCode::kInvalidInput, "config sim.noise_family: expected gaussian or student_t");
  g.noise_df = c.real("sim.noise_df");
  g.burn_in = c.integer("sim.burn_in");
  g.start_date = c.get("sim.start_date");
  g.seed = c.integer("seed");
  g.validate();
  return g;
}

}  // namespace stoat
