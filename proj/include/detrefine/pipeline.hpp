#pragma once

#include <cstddef>
#include <vector>

#include "detrefine/config.hpp"
#include "detrefine/types.hpp"

namespace detrefine {

struct StageCounts {
  std::size_t input = 0;      // detections across all sources, before fusion
  std::size_t fused = 0;      // after fusion (equals input when not fusing)
  std::size_t tracked = 0;    // detections a track claimed
  std::size_t relabeled = 0;
  std::size_t removed = 0;
  std::size_t virtuals = 0;   // auxiliary boxes in the final output
  std::size_t output = 0;
};

struct PipelineResult {
  std::vector<FrameSet> videos;  // sorted by video id
  // Label corrections in application order, tagged with their video id.
  std::vector<std::pair<int, Correction>> corrections;
  StageCounts counts;
};

// Full post-processing chain over any number of detector outputs:
// fuse (when several sources), track, correct labels, expand context,
// cap each frame. Stages can be disabled via the config; with every stage
// off a single source passes through unchanged. Videos are processed
// independently; `jobs` > 1 spreads them over worker threads without
// changing any result.
PipelineResult run_pipeline(const std::vector<std::vector<FrameSet>>& inputs,
                            const PipelineConfig& cfg, int jobs = 1);

}  // namespace detrefine
