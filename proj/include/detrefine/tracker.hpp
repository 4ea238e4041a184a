#pragma once

#include <vector>

#include "detrefine/kalman.hpp"
#include "detrefine/types.hpp"

namespace detrefine {

struct TrackerConfig {
  // Detections below this confidence are invisible to the tracker.
  double det_thresh = 0.3;
  // Association gate parameter. In the default permissive reading a pair is
  // admissible when IoU >= 1 - iou_threshold; with strict_gate the value is
  // used directly as the minimum IoU.
  double iou_threshold = 0.85;
  bool strict_gate = false;
  // Consecutive unmatched frames a track survives before it is retired.
  int max_age = 10;
  // Updates required before a track's assignments are reported.
  int min_hits = 1;
  // How many observations back the velocity direction is measured over.
  int momentum_window = 3;
  // Weight of the direction-consistency bonus in the association cost.
  double momentum_weight = 0.2;

  double iou_gate() const {
    return strict_gate ? iou_threshold : 1.0 - iou_threshold;
  }
};

enum class TrackStatus { tentative, active, lost, dead };

// One accepted measurement. det_index addresses the detection inside the
// frame's original detection vector, so downstream passes can reach back
// into the FrameSet it came from.
struct TrackObservation {
  int frame = 0;
  int det_index = 0;
  Detection det;
};

struct Track {
  int id = 0;
  KalmanState state;
  // Snapshot of `state` taken right after the last real update; the filter
  // is rewound to it when a lost track is re-acquired.
  KalmanState anchor;
  std::vector<TrackObservation> history;
  int last_frame = 0;
  int age_since_update = 0;
  int hit_count = 0;
  TrackStatus status = TrackStatus::tentative;
  // Unit direction of recent motion, valid once has_velocity is set.
  double vel_dx = 0.0;
  double vel_dy = 0.0;
  bool has_velocity = false;

  BoundingBox predicted_box() const { return state_box(state); }
  const BoundingBox& last_box() const { return history.back().det.box; }
};

struct Association {
  std::vector<std::pair<int, int>> matches;  // (track index, det index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

// Match predicted track boxes against candidate detections. Cost is
// 1 - IoU minus a direction-consistency bonus for tracks with a velocity
// estimate; pairs under the IoU gate are inadmissible.
Association associate(const std::vector<Track>& tracks,
                      const std::vector<Detection>& dets,
                      const TrackerConfig& cfg);

// One reported assignment from a step: this detection now belongs to this
// track.
struct Emission {
  int track_id = 0;
  int det_index = 0;
  Detection det;
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

  // Advance one frame. Frames must be strictly increasing across calls;
  // the detection vector may be empty. Returns the assignments made this
  // frame for tracks past min_hits, ordered by det_index.
  std::vector<Emission> step(int frame, const std::vector<Detection>& dets);

  const std::vector<Track>& tracks() const { return tracks_; }
  const std::vector<Track>& graveyard() const { return graveyard_; }
  // Alive and retired tracks together, sorted by id.
  std::vector<Track> all_tracks() const;

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::vector<Track> graveyard_;
  int next_id_ = 1;
  bool stepped_ = false;
  int last_step_frame_ = 0;
};

// Track a whole video, stepping through every integer frame between the
// first and last frame present so that gaps age tracks in real frames.
// Returns every track the video produced, sorted by id.
std::vector<Track> run_video(const FrameSet& fs, const TrackerConfig& cfg);

}  // namespace detrefine
