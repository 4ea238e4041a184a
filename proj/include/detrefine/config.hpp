#pragma once

#include <string>

#include "detrefine/adaptive_labeling.hpp"
#include "detrefine/expander.hpp"
#include "detrefine/fusion.hpp"
#include "detrefine/harness.hpp"
#include "detrefine/tracker.hpp"

namespace detrefine {

struct PipelineConfig {
  TrackerConfig tracker;
  RefineConfig refine;
  ExpanderConfig expander;
  FusionConfig fusion;
  // Per-frame detection budget applied after expansion.
  int top_k = 100;
  bool enable_adaptive_labeling = true;
  bool enable_expander = true;
  bool enable_fusion = true;
};

// JSON with one optional section per stage plus the top-level switches.
// Absent keys keep their defaults; unknown keys are rejected so typos
// cannot silently fall back to defaults.
PipelineConfig parse_pipeline_config(const std::string& text,
                                     const std::string& source_name);
PipelineConfig load_pipeline_config(const std::string& path);

// Synthetic scenario file: scene parameters, actors, occlusions, and an
// optional corruption section.
struct ScenarioFile {
  Scenario scenario;
  CorruptionSpec corruption;
  bool has_corruption = false;
};

ScenarioFile parse_scenario(const std::string& text,
                            const std::string& source_name);
ScenarioFile load_scenario(const std::string& path);

}  // namespace detrefine
