#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "detrefine/eval.hpp"
#include "detrefine/types.hpp"

namespace detrefine {

// One synthetic object moving in a straight line at constant speed.
struct ActorSpec {
  int identity = 0;
  int label = 0;
  double start_cx = 0.0;
  double start_cy = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double width = 0.0;
  double height = 0.0;
};

// Frames (inclusive) during which an actor produces no detection.
struct OcclusionWindow {
  int identity = 0;
  int first_frame = 0;
  int last_frame = 0;
};

struct Scenario {
  std::uint64_t seed = 0;
  int num_frames = 0;
  double extent_w = 1920.0;
  double extent_h = 1080.0;
  int video_id = 1;
  double det_conf = 0.9;
  std::vector<ActorSpec> actors;
  std::vector<OcclusionWindow> occlusions;
};

struct GeneratedScene {
  FrameSet detections;
  std::vector<GroundTruth> truth;
  // Actor identity behind each detection, aligned with the frame vectors.
  std::map<int, std::vector<int>> identities;
};

// Roll the scenario forward over frames 1..num_frames. Every visible actor
// yields one perfect detection and one ground truth box per frame.
GeneratedScene generate(const Scenario& sc);

// A ready-made scenario: twenty actors in separate vertical lanes, one per
// class cycling through all nine, moving at distinct speeds for a hundred
// frames inside a 1920x1080 extent.
Scenario demo_scenario();

enum class FlipMode {
  // Every detection flips independently with probability flip_rate.
  per_detection,
  // Each actor's detection run flips at most once, at a random interior
  // position, with probability flip_rate.
  one_per_track,
};

struct CorruptionSpec {
  double flip_rate = 0.0;
  // Confidence given to a flipped detection.
  double flip_conf = 0.2;
  double drop_rate = 0.0;
  // Uniform +-jitter_px noise added to box left/top.
  double jitter_px = 0.0;
  std::uint64_t seed = 0;
  FlipMode flip_mode = FlipMode::per_detection;
  // Labels a flip may switch to; the detection's own label is excluded.
  std::vector<int> flip_targets = {4, 5, 6, 7, 8, 9};
};

enum class CorruptionKind { flip, drop, jitter };

// One mutation. det_index addresses the detection in the PRISTINE frame
// vector; each detection suffers at most one event (a drop suppresses its
// other mutations, a flip subsumes jitter). `after` is the detection's
// final corrupted state, including any box jitter.
struct CorruptionEvent {
  CorruptionKind kind = CorruptionKind::flip;
  int frame = 0;
  int det_index = 0;
  Detection before;
  Detection after;
};

struct CorruptionResult {
  FrameSet detections;
  std::vector<CorruptionEvent> journal;
};

// Damage a scene deterministically under spec.seed. Flipped detections are
// never dropped, so every flip survives into the output.
CorruptionResult corrupt(const GeneratedScene& scene,
                         const CorruptionSpec& spec);

// Same, for a bare detection set. one_per_track needs actor identities and
// is rejected here.
CorruptionResult corrupt(const FrameSet& fs, const CorruptionSpec& spec);

// Replay a journal onto the pristine detections. Reproduces the corrupted
// set exactly; a journal with two events for one detection is rejected.
FrameSet apply_journal(const FrameSet& pristine,
                       const std::vector<CorruptionEvent>& journal);

struct RecoveryReport {
  int flips_total = 0;
  int flips_restored = 0;
  double recovery = 0.0;  // flips_restored over flips_total
  // Never-corrupted detections that did not survive refinement untouched.
  int collateral_total = 0;
  int collateral_protected = 0;  // of those, driver or motorbike boxes
};

// Compare refined output against the pristine detections. A flip counts as
// restored when the refined set holds a non-auxiliary detection at the
// corrupted box carrying the original label.
RecoveryReport score_recovery(const FrameSet& original,
                              const FrameSet& refined,
                              const std::vector<CorruptionEvent>& journal);

}  // namespace detrefine
