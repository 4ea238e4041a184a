#include "detrefine/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "detrefine/assignment.hpp"

namespace detrefine {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Direction-consistency bonus, in [-0.5, 0.5]: positive when the detection
// lies ahead of the track along its recent motion, negative when behind.
double direction_bonus(const Track& t, const Detection& d) {
  double dx = d.box.center_x() - t.last_box().center_x();
  double dy = d.box.center_y() - t.last_box().center_y();
  const double norm = std::hypot(dx, dy);
  if (norm < 1e-9) return 0.0;
  dx /= norm;
  dy /= norm;
  const double dot =
      std::clamp(dx * t.vel_dx + dy * t.vel_dy, -1.0, 1.0);
  return (kPi / 2.0 - std::abs(std::acos(dot))) / kPi;
}

BoundingBox lerp_box(const BoundingBox& a, const BoundingBox& b, double t) {
  auto mix = [t](double x, double y) { return x + (y - x) * t; };
  return BoundingBox{mix(a.left, b.left), mix(a.top, b.top),
                     mix(a.width, b.width), mix(a.height, b.height)};
}

}  // namespace

Association associate(const std::vector<Track>& tracks,
                      const std::vector<Detection>& dets,
                      const TrackerConfig& cfg) {
  Association out;
  const int nt = static_cast<int>(tracks.size());
  const int nd = static_cast<int>(dets.size());
  if (nt == 0 || nd == 0) {
    for (int i = 0; i < nt; ++i) out.unmatched_tracks.push_back(i);
    for (int j = 0; j < nd; ++j) out.unmatched_detections.push_back(j);
    return out;
  }

  const double gate = cfg.iou_gate();
  CostMatrix cost(nt, nd);
  for (int i = 0; i < nt; ++i) {
    const BoundingBox pred = tracks[i].predicted_box();
    for (int j = 0; j < nd; ++j) {
      const double overlap = iou(pred, dets[j].box);
      if (overlap < gate) {
        cost.forbid(i, j);
        continue;
      }
      double c = 1.0 - overlap;
      if (tracks[i].has_velocity) {
        c -= cfg.momentum_weight * dets[j].confidence *
             direction_bonus(tracks[i], dets[j]);
      }
      cost.set(i, j, c);
    }
  }

  out.matches = solve(cost);
  std::vector<char> track_used(nt, 0), det_used(nd, 0);
  for (const auto& [ti, di] : out.matches) {
    track_used[ti] = 1;
    det_used[di] = 1;
  }
  for (int i = 0; i < nt; ++i)
    if (!track_used[i]) out.unmatched_tracks.push_back(i);
  for (int j = 0; j < nd; ++j)
    if (!det_used[j]) out.unmatched_detections.push_back(j);
  return out;
}

std::vector<Emission> Tracker::step(int frame,
                                    const std::vector<Detection>& dets) {
  if (stepped_ && frame <= last_step_frame_) {
    throw ValidationError("tracker frames must be strictly increasing");
  }
  stepped_ = true;
  last_step_frame_ = frame;

  // Only confident detections take part; indices refer back to `dets`.
  std::vector<int> candidate_index;
  std::vector<Detection> candidates;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
    if (dets[i].confidence >= cfg_.det_thresh) {
      candidate_index.push_back(i);
      candidates.push_back(dets[i]);
    }
  }

  for (Track& t : tracks_) {
    kalman_predict(t.state);
    ++t.age_since_update;
  }

  const Association assoc = associate(tracks_, candidates, cfg_);
  std::vector<Emission> emissions;

  auto record = [&](Track& t, int det_index, const Detection& det) {
    // Velocity points from an observation momentum_window steps back
    // toward the new measurement.
    const std::size_t n = t.history.size();
    const std::size_t back =
        std::min<std::size_t>(cfg_.momentum_window, n - 1);
    const BoundingBox& old_box = t.history[n - 1 - back].det.box;
    double dx = det.box.center_x() - old_box.center_x();
    double dy = det.box.center_y() - old_box.center_y();
    const double norm = std::hypot(dx, dy);
    if (norm > 1e-9) {
      t.vel_dx = dx / norm;
      t.vel_dy = dy / norm;
      t.has_velocity = true;
    }

    t.history.push_back(TrackObservation{frame, det_index, det});
    t.last_frame = frame;
    t.age_since_update = 0;
    ++t.hit_count;
    t.status = t.hit_count >= cfg_.min_hits ? TrackStatus::active
                                            : TrackStatus::tentative;
    t.anchor = t.state;
    if (t.hit_count >= cfg_.min_hits) {
      emissions.push_back(Emission{t.id, det_index, det});
    }
  };

  for (const auto& [ti, ci] : assoc.matches) {
    Track& t = tracks_[ti];
    const Detection& det = candidates[ci];
    const int gap = frame - t.last_frame;
    if (gap >= 2) {
      // Re-acquired after missed frames: rewind to the last confirmed
      // state and replay the filter along the straight line between the
      // two real observations, one virtual measurement per missed frame.
      t.state = t.anchor;
      const BoundingBox& from = t.last_box();
      for (int i = 1; i <= gap; ++i) {
        kalman_predict(t.state);
        kalman_update(t.state,
                      lerp_box(from, det.box, static_cast<double>(i) / gap));
      }
    } else {
      kalman_update(t.state, det.box);
    }
    record(t, candidate_index[ci], det);
  }

  for (int ci : assoc.unmatched_detections) {
    const Detection& det = candidates[ci];
    Track t;
    t.id = next_id_++;
    t.state = kalman_init(det.box);
    t.anchor = t.state;
    t.history.push_back(TrackObservation{frame, candidate_index[ci], det});
    t.last_frame = frame;
    t.age_since_update = 0;
    t.hit_count = 1;
    t.status = t.hit_count >= cfg_.min_hits ? TrackStatus::active
                                            : TrackStatus::tentative;
    if (t.hit_count >= cfg_.min_hits) {
      emissions.push_back(Emission{t.id, candidate_index[ci], det});
    }
    tracks_.push_back(std::move(t));
  }

  for (int ti : assoc.unmatched_tracks) {
    tracks_[ti].status = TrackStatus::lost;
  }

  // Retire overdue tracks only after the whole frame is processed, so a
  // track matched on its last admissible frame survives.
  std::vector<Track> alive;
  alive.reserve(tracks_.size());
  for (Track& t : tracks_) {
    if (t.age_since_update > cfg_.max_age) {
      t.status = TrackStatus::dead;
      graveyard_.push_back(std::move(t));
    } else {
      alive.push_back(std::move(t));
    }
  }
  tracks_ = std::move(alive);

  std::sort(emissions.begin(), emissions.end(),
            [](const Emission& a, const Emission& b) {
              return a.det_index < b.det_index;
            });
  return emissions;
}

std::vector<Track> Tracker::all_tracks() const {
  std::vector<Track> all = graveyard_;
  all.insert(all.end(), tracks_.begin(), tracks_.end());
  std::sort(all.begin(), all.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });
  return all;
}

std::vector<Track> run_video(const FrameSet& fs, const TrackerConfig& cfg) {
  if (fs.frames.empty()) return {};
  if (!fs.consistent()) {
    throw ValidationError("detections disagree with their frame key");
  }
  Tracker tracker(cfg);
  const int first = fs.frames.begin()->first;
  const int last = fs.frames.rbegin()->first;
  const std::vector<Detection> empty;
  for (int f = first; f <= last; ++f) {
    auto it = fs.frames.find(f);
    tracker.step(f, it == fs.frames.end() ? empty : it->second);
  }
  return tracker.all_tracks();
}

}  // namespace detrefine
