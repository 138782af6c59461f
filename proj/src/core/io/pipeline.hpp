#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace stoat {

enum class Stage { kBuildSpatial, kEstimate, kAdjust, kTrain, kForecast, kEvaluate, kSimulate, kPipeline };

Stage parse_stage(const std::string& name);
std::string stage_name(Stage stage);

// Artifact file names a stage writes into the output directory.
const std::vector<std::string>& stage_artifacts(Stage stage);

inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kCheckpointFile = "model.ckpt";

struct StageReport {
  std::vector<std::string> artifacts;
  std::vector<std::string> notes;
};

// Runs one stage (or the whole chain for kPipeline) against the artifacts in
// the configured output directory and records the outcome in the manifest.
// Errors are rethrown prefixed with the stage name; that stage's artifacts
// and everything downstream are flagged stale.
StageReport run_stage(Stage stage, const RunConfig& config);

}  // namespace stoat
