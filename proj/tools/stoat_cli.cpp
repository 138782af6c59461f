#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stoat/stoat.h"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string seed;
  std::vector<std::string> overrides;
};

int report(int status, const std::string& context) {
  if (status != STOAT_OK)
    std::fprintf(stderr, "stoat %s: error [%s]: %s\n", context.c_str(), stoat_status_name(status),
                 stoat_last_error());
  return status;
}

// Builds the effective config: file, then --set pairs, then --seed/--out.
int make_config(const Common& c, stoat_config** cfg) {
  int st = c.config.empty() ? stoat_config_new(cfg) : stoat_config_load(c.config.c_str(), cfg);
  if (st != STOAT_OK) return st;
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "stoat: --set expects key=value, got '%s'\n", kv.c_str());
      return STOAT_ERR_INVALID_INPUT;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if ((st = stoat_config_set(*cfg, key.c_str(), value.c_str())) != STOAT_OK) return st;
  }
  if (!c.seed.empty() && (st = stoat_config_set(*cfg, "seed", c.seed.c_str())) != STOAT_OK) return st;
  if (!c.out.empty() && (st = stoat_config_set(*cfg, "out", c.out.c_str())) != STOAT_OK) return st;
  return STOAT_OK;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key=value configuration file");
  app->add_option("--out", c.out, "output directory (overrides config 'out')");
  app->add_option("--seed", c.seed, "run seed (overrides config 'seed')");
  app->add_option("--set", c.overrides, "override a config key: --set key=value")->take_all();
}

int print_keys() {
  for (size_t k = 0; k < stoat_config_key_count(); ++k) {
    const char *name = nullptr, *def = nullptr, *desc = nullptr;
    stoat_config_key_info(k, &name, &def, &desc);
    std::printf("%s=%s\n    %s\n", name, def, desc);
  }
  return STOAT_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-temporal causal forecasting toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(stoat_version()));

  const std::vector<std::pair<std::string, std::string>> stages{
      {"build-spatial", "build the inverse-distance spatial matrix"},
      {"estimate", "estimate the spatial difference-in-differences model"},
      {"adjust", "write the causally adjusted panel"},
      {"train", "train the probabilistic forecaster"},
      {"forecast", "draw forecast sample paths"},
      {"evaluate", "score forecast samples against the truth panel"},
      {"simulate", "generate a synthetic panel with known parameters"},
      {"pipeline", "run build-spatial through evaluate"},
  };
  std::map<std::string, Common> common;
  std::string forecast_path, truth_path, label;
  for (const auto& [name, help] : stages) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, common[name]);
    if (name == "evaluate") {
      sub->add_option("--forecast", forecast_path, "forecast_samples.csv to score (default: <out>/forecast_samples.csv)");
      sub->add_option("--truth", truth_path, "panel-format truth file (default: config 'panel')");
      sub->add_option("--label", label, "model label for scores_long.csv");
    }
  }
  app.add_subcommand("keys", "list configuration keys and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : STOAT_ERR_INVALID_INPUT;
  }

  auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  if (name == "keys") return print_keys();

  stoat_config* cfg = nullptr;
  int st = make_config(common[name], &cfg);
  if (st != STOAT_OK) {
    stoat_config_free(cfg);
    return report(st, name);
  }
  if (name == "evaluate" && (!forecast_path.empty() || !truth_path.empty())) {
    char out[4096], panel[4096], lbl[512];
    stoat_config_get(cfg, "out", out, sizeof out, nullptr);
    stoat_config_get(cfg, "panel", panel, sizeof panel, nullptr);
    stoat_config_get(cfg, "model_label", lbl, sizeof lbl, nullptr);
    const std::string f = forecast_path.empty() ? std::string(out) + "/forecast_samples.csv" : forecast_path;
    const std::string t = truth_path.empty() ? std::string(panel) : truth_path;
    const std::string l = !label.empty() ? label : (lbl[0] ? std::string(lbl) : std::string("model"));
    st = stoat_evaluate_files(f.c_str(), t.c_str(), out, l.c_str());
  } else {
    st = stoat_run_stage(cfg, name.c_str());
  }
  stoat_config_free(cfg);
  return report(st, name);
}
