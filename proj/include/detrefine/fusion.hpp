#pragma once

#include <vector>

#include "detrefine/types.hpp"

namespace detrefine {

struct FusionConfig {
  // Same-class boxes overlapping the running cluster box at least this
  // much join the cluster.
  double iou_thr = 0.55;
  // Detections below this confidence are ignored entirely.
  double skip_box_thr = 0.0;
  // Per-source weights; empty means every source weighs 1. When present
  // the length must equal the number of sources.
  std::vector<double> source_weights;
};

// Weighted box fusion across detector outputs for one frame. Boxes from
// all sources are pooled, clustered per class by IoU against each
// cluster's running weighted-average box, and each cluster collapses to
// one box: coordinates are confidence-weighted means and the confidence is
// the cluster's mean weighted confidence scaled down when fewer sources
// than expected contributed. The result is independent of source order.
std::vector<Detection> fuse_frame(
    const std::vector<std::vector<Detection>>& sources,
    const FusionConfig& cfg);

// Fuse the same video as seen by several detectors, frame by frame. All
// sources must carry the same video id; a source missing a frame simply
// contributes nothing there.
FrameSet fuse_video(const std::vector<FrameSet>& sources,
                    const FusionConfig& cfg);

}  // namespace detrefine
