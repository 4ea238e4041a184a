#include "detrefine/adaptive_labeling.hpp"

#include <algorithm>
#include <map>

namespace detrefine {
namespace {

using RemovalMask = std::map<int, std::vector<char>>;

Detection& live_detection(FrameSet& fs, int frame, int det_index,
                          const char* who) {
  auto it = fs.frames.find(frame);
  if (it == fs.frames.end() || det_index < 0 ||
      det_index >= static_cast<int>(it->second.size())) {
    throw ValidationError(std::string(who) +
                          " references a detection that is not in the set");
  }
  return it->second[det_index];
}

std::vector<char>& mask_for(RemovalMask& mask, const FrameSet& fs,
                            int frame) {
  auto [it, inserted] = mask.try_emplace(frame);
  if (inserted) it->second.assign(fs.frames.at(frame).size(), 0);
  return it->second;
}

bool is_masked(const RemovalMask& mask, int frame, int det_index) {
  auto it = mask.find(frame);
  return it != mask.end() && it->second[det_index];
}

// Erase masked detections. Frames left empty disappear entirely.
void compact(FrameSet& fs, const RemovalMask& mask) {
  for (const auto& [frame, dead] : mask) {
    auto it = fs.frames.find(frame);
    if (it == fs.frames.end()) continue;
    std::vector<Detection> kept;
    kept.reserve(it->second.size());
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      if (!dead[i]) kept.push_back(it->second[i]);
    }
    if (kept.empty()) {
      fs.frames.erase(it);
    } else {
      it->second = std::move(kept);
    }
  }
}

std::vector<Correction> refine_one(FrameSet& fs, const Track& track,
                                   const RefineConfig& cfg,
                                   RemovalMask& mask) {
  std::vector<Correction> journal;
  if (track.history.empty()) return journal;

  const TrackStats stats = track_stats(track);
  if (stats.quality < cfg.theta_q) return journal;
  const double threshold = adaptive_threshold(stats, cfg);

  for (const TrackObservation& obs : track.history) {
    Detection& det = live_detection(fs, obs.frame, obs.det_index, "track");
    if (is_masked(mask, obs.frame, obs.det_index)) continue;
    if (det.label == stats.consistent_label) continue;
    if (classes::is_protected(det.label)) continue;
    if (det.confidence >= threshold) continue;

    // A confident overlapping detection that already carries the track
    // label means this box is a duplicate view, not a mislabel; leave it.
    bool covered = false;
    const std::vector<Detection>& frame_dets = fs.frames.at(obs.frame);
    for (std::size_t j = 0; j < frame_dets.size(); ++j) {
      if (static_cast<int>(j) == obs.det_index) continue;
      if (is_masked(mask, obs.frame, static_cast<int>(j))) continue;
      const Detection& other = frame_dets[j];
      if (other.label != stats.consistent_label) continue;
      if (other.confidence < cfg.match_conf_min) continue;
      if (iou(det.box, other.box) > cfg.spatial_iou) {
        covered = true;
        break;
      }
    }
    if (covered) continue;

    Correction c;
    c.frame = obs.frame;
    c.det_index = obs.det_index;
    c.track_id = track.id;
    c.old_label = det.label;
    c.old_conf = det.confidence;
    if (det.box.area() <= cfg.area_min) {
      c.action = CorrectionAction::relabel;
      c.new_label = stats.consistent_label;
      c.new_conf = cfg.lambda * det.confidence;
      det.label = c.new_label;
      det.confidence = c.new_conf;
      det.origin = Origin::relabeled;
    } else {
      c.action = CorrectionAction::remove;
      mask_for(mask, fs, obs.frame)[obs.det_index] = 1;
    }
    journal.push_back(c);
  }
  return journal;
}

}  // namespace

double label_change_ratio(const std::vector<TrackObservation>& history) {
  if (history.size() < 2) return 0.0;
  int switches = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].det.label != history[i - 1].det.label) ++switches;
  }
  return static_cast<double>(switches) /
         static_cast<double>(history.size() - 1);
}

TrackStats track_stats(const Track& track) {
  TrackStats stats;
  if (track.history.empty()) return stats;

  double conf_sum = 0.0;
  std::map<int, double> votes;  // label -> summed confidence
  for (const TrackObservation& obs : track.history) {
    conf_sum += obs.det.confidence;
    votes[obs.det.label] += obs.det.confidence;
  }
  stats.mean_conf = conf_sum / static_cast<double>(track.history.size());
  stats.change_ratio = label_change_ratio(track.history);
  stats.quality = (1.0 - stats.change_ratio) * stats.mean_conf;

  // std::map iterates labels ascending, so on equal votes the lowest label
  // wins by keeping the strict comparison.
  double best = -1.0;
  for (const auto& [label, vote] : votes) {
    if (vote > best) {
      best = vote;
      stats.consistent_label = label;
    }
  }
  return stats;
}

double adaptive_threshold(const TrackStats& stats, const RefineConfig& cfg) {
  const double base = cfg.theta0 + cfg.alpha * (1.0 - stats.mean_conf);
  return base * (1.0 + (0.5 - stats.quality));
}

std::vector<Correction> refine_track(FrameSet& fs, const Track& track,
                                     const RefineConfig& cfg) {
  RemovalMask mask;
  std::vector<Correction> journal = refine_one(fs, track, cfg, mask);
  compact(fs, mask);
  return journal;
}

std::vector<Correction> refine_video(FrameSet& fs,
                                     const std::vector<Track>& tracks,
                                     const RefineConfig& cfg) {
  std::vector<const Track*> order;
  order.reserve(tracks.size());
  for (const Track& t : tracks) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](const Track* a, const Track* b) { return a->id < b->id; });

  RemovalMask mask;
  std::vector<Correction> journal;
  for (const Track* t : order) {
    std::vector<Correction> part = refine_one(fs, *t, cfg, mask);
    journal.insert(journal.end(), part.begin(), part.end());
  }
  compact(fs, mask);
  return journal;
}

void apply_corrections(FrameSet& fs, const std::vector<Correction>& journal) {
  RemovalMask mask;
  for (const Correction& c : journal) {
    Detection& det = live_detection(fs, c.frame, c.det_index, "journal");
    if (det.label != c.old_label) {
      throw ValidationError("journal entry does not match the detection set");
    }
    if (c.action == CorrectionAction::relabel) {
      det.label = c.new_label;
      det.confidence = c.new_conf;
      det.origin = Origin::relabeled;
    } else {
      mask_for(mask, fs, c.frame)[c.det_index] = 1;
    }
  }
  compact(fs, mask);
}

}  // namespace detrefine
