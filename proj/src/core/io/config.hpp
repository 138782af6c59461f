#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../causal.hpp"
#include "../probmodel/model.hpp"
#include "../synth.hpp"

namespace stoat {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string description;
};

// Every recognised key with its default.
const std::vector<ConfigKey>& config_keys();

// Flat key=value run configuration. Lines starting with '#' are comments.
class RunConfig {
 public:
  RunConfig();

  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  // Throws kInvalidInput for unknown keys.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  std::string text() const;  // canonical key=value dump, keys sorted
  const std::map<std::string, std::string>& values() const { return values_; }

  double real(const std::string& key) const;
  std::uint64_t integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

struct RunSettings {
  std::string regions_path;
  std::string panel_path;
  std::string out_dir;
  std::optional<Date> post_onset;
  std::vector<std::string> covariates;
  double alpha = 1.0;
  bool no_spatial = false;
  bool no_factors = false;
  bool holdout = true;
  InstrumentSet instruments = InstrumentSet::kSpatial;
  TargetTransformKind target_transform = TargetTransformKind::kLog1pStandardize;
  ModelConfig model;
  std::string model_label;

  EstimationOptions estimation() const;
};

RunSettings settings_from(const RunConfig& config);
GeneratorSpec generator_from(const RunConfig& config);

}  // namespace stoat
