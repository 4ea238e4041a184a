#pragma once

#include <vector>

#include "detrefine/tracker.hpp"
#include "detrefine/types.hpp"

namespace detrefine {

struct RefineConfig {
  // Base per-detection confidence threshold.
  double theta0 = 0.3;
  // How strongly low track confidence raises the threshold.
  double alpha = 0.35;
  // Minimum track quality required before any correction is attempted.
  double theta_q = 0.4;
  // Confidence multiplier applied to relabeled detections.
  double lambda = 0.1;
  // A same-frame detection already carrying the track label suppresses a
  // correction when it overlaps this much and is at least this confident.
  double spatial_iou = 0.8;
  double match_conf_min = 0.5;
  // Boxes up to this area are relabeled; larger offenders are removed.
  double area_min = 2500.0;
};

// Aggregates over a track's accepted observations.
struct TrackStats {
  double mean_conf = 0.0;
  // Fraction of consecutive observation pairs whose labels differ.
  double change_ratio = 0.0;
  // (1 - change_ratio) * mean_conf.
  double quality = 0.0;
  // Label with the highest summed confidence; ties go to the lowest id.
  int consistent_label = 0;
};

enum class CorrectionAction { relabel, remove };

struct Correction {
  int frame = 0;
  int det_index = 0;
  int track_id = 0;
  CorrectionAction action = CorrectionAction::relabel;
  int old_label = 0;
  int new_label = 0;  // zero for removals
  double old_conf = 0.0;
  double new_conf = 0.0;  // zero for removals
};

// Fraction of label switches along the observation sequence; zero for a
// single observation.
double label_change_ratio(const std::vector<TrackObservation>& history);

TrackStats track_stats(const Track& track);

// Per-track correction threshold, grown from theta0 by track uncertainty.
double adaptive_threshold(const TrackStats& stats, const RefineConfig& cfg);

// Correct one track's observations in place. Statistics come from the
// track's recorded history; eligibility reads the current FrameSet values,
// so corrections applied earlier in the same pass are respected. Removed
// detections are erased before returning.
std::vector<Correction> refine_track(FrameSet& fs, const Track& track,
                                     const RefineConfig& cfg);

// Correct every track (processed in id order) and compact removals once at
// the end. Returns the combined journal in application order.
std::vector<Correction> refine_video(FrameSet& fs,
                                     const std::vector<Track>& tracks,
                                     const RefineConfig& cfg);

// Replay a journal against a FrameSet holding the detections the journal
// was produced from. Throws ValidationError when a journal entry disagrees
// with what it finds.
void apply_corrections(FrameSet& fs, const std::vector<Correction>& journal);

}  // namespace detrefine
