#pragma once

#include <vector>

#include "detrefine/types.hpp"

namespace detrefine {

struct ExpanderConfig {
  // Same-class boxes overlapping at least this much are duplicates; only
  // the more confident one survives.
  double dedup_iou = 0.8;
  // Confidence given to the auxiliary boxes seeded from a motorbike.
  double motor_conf = 1e-5;
  // Base confidence for auxiliary boxes seeded from a person, and the
  // bump added for the rarely observed classes.
  double human_conf_base = 1e-4;
  double rare_offset = 3e-5;
  std::vector<int> rare_classes = {4, 6, 7, 8, 9};
  // Passenger-in-front boxes shrink toward the seed box center.
  double p0_scale = 0.7;
  // Confidence the seed must exceed before each special-case box is added.
  double motor_gate = 0.01;
  double p0_gate = 0.1;
  double p2_gate = 0.01;
};

// Remove same-class near-duplicates from one frame, keeping the higher
// confidence box of each overlapping pair. Survivors keep input order.
std::vector<Detection> dedup_overlaps(const std::vector<Detection>& dets,
                                      const ExpanderConfig& cfg);

// Grow one frame's detections with low-confidence auxiliary boxes: every
// motorbike seeds one box per rider class at its own location, and every
// rider seeds boxes for the classes that plausibly co-occur with it.
// Input should already be deduplicated; auxiliary boxes are appended after
// the originals and never seed further boxes themselves.
std::vector<Detection> expand_frame(const std::vector<Detection>& dets,
                                    const ExpanderConfig& cfg);

// Stable ranking used everywhere a frame's detections need a canonical
// order: confidence descending, then original boxes before relabeled
// before auxiliary, then class ascending, then input order.
std::vector<Detection> ranked_order(const std::vector<Detection>& dets);

// First k detections of ranked_order, in that order.
std::vector<Detection> cap_top_k(const std::vector<Detection>& dets,
                                 int k = 100);

}  // namespace detrefine
