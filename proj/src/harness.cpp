#include "detrefine/harness.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "detrefine/rng.hpp"

namespace detrefine {
namespace {

bool occluded(const Scenario& sc, int identity, int frame) {
  for (const OcclusionWindow& w : sc.occlusions) {
    if (w.identity == identity && frame >= w.first_frame &&
        frame <= w.last_frame) {
      return true;
    }
  }
  return false;
}

bool same_box(const BoundingBox& a, const BoundingBox& b) {
  return a.left == b.left && a.top == b.top && a.width == b.width &&
         a.height == b.height;
}

// Pick a flip target other than the current label; -1 when none exists.
int pick_target(Rng& rng, const CorruptionSpec& spec, int current) {
  std::vector<int> pool;
  for (int t : spec.flip_targets) {
    if (t != current) pool.push_back(t);
  }
  if (pool.empty()) return -1;
  return pool[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
}

CorruptionResult corrupt_impl(const FrameSet& pristine,
                              const std::map<int, std::vector<int>>* identities,
                              const CorruptionSpec& spec) {
  Rng rng(spec.seed);

  // Phase 1: decide flips. Keyed by (frame, pristine index).
  std::map<std::pair<int, int>, int> flips;  // -> new label
  if (spec.flip_mode == FlipMode::per_detection) {
    for (const auto& [frame, dets] : pristine.frames) {
      for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
        if (!rng.chance(spec.flip_rate)) continue;
        const int target = pick_target(rng, spec, dets[i].label);
        if (target >= 0) flips[{frame, i}] = target;
      }
    }
  } else {
    if (identities == nullptr) {
      throw ValidationError(
          "per-track corruption needs a generated scene with identities");
    }
    // Gather each actor's run of (frame, index) positions, in frame order.
    std::map<int, std::vector<std::pair<int, int>>> runs;
    for (const auto& [frame, ids] : *identities) {
      for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
        runs[ids[i]].emplace_back(frame, i);
      }
    }
    for (const auto& [identity, run] : runs) {
      if (!rng.chance(spec.flip_rate)) continue;
      const int n = static_cast<int>(run.size());
      // Interior position when the run allows one, so the flip has real
      // context on both sides.
      const int pos =
          n >= 3 ? static_cast<int>(rng.uniform_int(1, n - 2))
                 : static_cast<int>(rng.uniform_int(0, n - 1));
      const auto [frame, index] = run[pos];
      const int target =
          pick_target(rng, spec, pristine.frames.at(frame)[index].label);
      if (target >= 0) flips[{frame, index}] = target;
    }
  }

  // Phase 2: jitter offsets for every detection, flipped or not.
  std::map<std::pair<int, int>, std::pair<double, double>> jitter;
  if (spec.jitter_px > 0.0) {
    for (const auto& [frame, dets] : pristine.frames) {
      for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
        jitter[{frame, i}] = {rng.uniform(-spec.jitter_px, spec.jitter_px),
                              rng.uniform(-spec.jitter_px, spec.jitter_px)};
      }
    }
  }

  // Phase 3: drops, never hitting a flipped detection.
  std::set<std::pair<int, int>> drops;
  if (spec.drop_rate > 0.0) {
    for (const auto& [frame, dets] : pristine.frames) {
      for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
        if (flips.count({frame, i})) continue;
        if (rng.chance(spec.drop_rate)) drops.insert({frame, i});
      }
    }
  }

  // Materialize the corrupted set and the journal, one event per touched
  // detection: drop beats flip beats jitter.
  CorruptionResult result;
  result.detections.video_id = pristine.video_id;
  for (const auto& [frame, dets] : pristine.frames) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
      const Detection& before = dets[i];
      if (drops.count({frame, i})) {
        result.journal.push_back(CorruptionEvent{CorruptionKind::drop, frame,
                                                 i, before, before});
        continue;
      }
      Detection after = before;
      auto flip_it = flips.find({frame, i});
      if (flip_it != flips.end()) {
        after.label = flip_it->second;
        after.confidence = spec.flip_conf;
      }
      auto jit_it = jitter.find({frame, i});
      if (jit_it != jitter.end()) {
        after.box.left += jit_it->second.first;
        after.box.top += jit_it->second.second;
      }
      if (flip_it != flips.end()) {
        result.journal.push_back(
            CorruptionEvent{CorruptionKind::flip, frame, i, before, after});
      } else if (jit_it != jitter.end()) {
        result.journal.push_back(
            CorruptionEvent{CorruptionKind::jitter, frame, i, before, after});
      }
      out.push_back(after);
    }
    if (!out.empty()) result.detections.frames.emplace(frame, std::move(out));
  }
  return result;
}

}  // namespace

GeneratedScene generate(const Scenario& sc) {
  if (sc.num_frames < 1) {
    throw ValidationError("scenario needs at least one frame");
  }
  std::set<int> seen_ids;
  for (const ActorSpec& a : sc.actors) {
    if (!seen_ids.insert(a.identity).second) {
      throw ValidationError("actor identity " + std::to_string(a.identity) +
                            " appears twice");
    }
    if (!classes::valid(a.label)) {
      throw ValidationError("actor " + std::to_string(a.identity) +
                            " has an invalid class " +
                            std::to_string(a.label));
    }
    if (!(a.width > 0.0) || !(a.height > 0.0)) {
      throw ValidationError("actor " + std::to_string(a.identity) +
                            " has a degenerate box size");
    }
  }

  GeneratedScene scene;
  scene.detections.video_id = sc.video_id;
  for (int f = 1; f <= sc.num_frames; ++f) {
    std::vector<Detection> dets;
    std::vector<int> ids;
    for (const ActorSpec& a : sc.actors) {
      const double cx = a.start_cx + a.vx * (f - 1);
      const double cy = a.start_cy + a.vy * (f - 1);
      const BoundingBox box{cx - a.width / 2.0, cy - a.height / 2.0, a.width,
                            a.height};
      if (box.left < 0.0 || box.top < 0.0 || box.right() > sc.extent_w ||
          box.bottom() > sc.extent_h) {
        throw ValidationError("actor " + std::to_string(a.identity) +
                              " leaves the image extent at frame " +
                              std::to_string(f));
      }
      // Occlusion hides the detection but the object is still there.
      scene.truth.push_back(GroundTruth{sc.video_id, f, box, a.label});
      if (occluded(sc, a.identity, f)) continue;
      Detection d;
      d.frame = f;
      d.box = box;
      d.label = a.label;
      d.confidence = sc.det_conf;
      d.origin = Origin::detector;
      dets.push_back(d);
      ids.push_back(a.identity);
    }
    if (!dets.empty()) {
      scene.detections.frames.emplace(f, std::move(dets));
      scene.identities.emplace(f, std::move(ids));
    }
  }
  return scene;
}

Scenario demo_scenario() {
  Scenario sc;
  sc.seed = 7;
  sc.num_frames = 100;
  sc.video_id = 1;
  sc.det_conf = 0.9;
  for (int i = 0; i < 20; ++i) {
    ActorSpec a;
    a.identity = i + 1;
    a.label = 1 + i % 9;
    a.start_cx = 60.0 + 90.0 * i;  // separate lanes, no cross-actor overlap
    a.start_cy = 80.0;
    a.vx = 0.0;
    a.vy = 1.0 + 0.18 * i;  // distinct speeds, all staying inside 1080p
    a.width = 40.0;
    a.height = 50.0;
    sc.actors.push_back(a);
  }
  return sc;
}

CorruptionResult corrupt(const GeneratedScene& scene,
                         const CorruptionSpec& spec) {
  return corrupt_impl(scene.detections, &scene.identities, spec);
}

CorruptionResult corrupt(const FrameSet& fs, const CorruptionSpec& spec) {
  return corrupt_impl(fs, nullptr, spec);
}

FrameSet apply_journal(const FrameSet& pristine,
                       const std::vector<CorruptionEvent>& journal) {
  std::map<std::pair<int, int>, const CorruptionEvent*> by_slot;
  for (const CorruptionEvent& ev : journal) {
    if (!by_slot.emplace(std::pair{ev.frame, ev.det_index}, &ev).second) {
      throw ValidationError("journal has two events for frame " +
                            std::to_string(ev.frame) + " detection " +
                            std::to_string(ev.det_index));
    }
  }

  FrameSet out;
  out.video_id = pristine.video_id;
  for (const auto& [frame, dets] : pristine.frames) {
    std::vector<Detection> replayed;
    replayed.reserve(dets.size());
    for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
      auto it = by_slot.find({frame, i});
      if (it == by_slot.end()) {
        replayed.push_back(dets[i]);
      } else if (it->second->kind != CorruptionKind::drop) {
        replayed.push_back(it->second->after);
      }
    }
    if (!replayed.empty()) out.frames.emplace(frame, std::move(replayed));
  }
  return out;
}

RecoveryReport score_recovery(const FrameSet& original,
                              const FrameSet& refined,
                              const std::vector<CorruptionEvent>& journal) {
  RecoveryReport report;

  std::map<int, std::set<int>> touched;  // frame -> pristine indices
  for (const CorruptionEvent& ev : journal) {
    touched[ev.frame].insert(ev.det_index);
  }

  for (const CorruptionEvent& ev : journal) {
    if (ev.kind != CorruptionKind::flip) continue;
    ++report.flips_total;
    auto it = refined.frames.find(ev.frame);
    if (it == refined.frames.end()) continue;
    for (const Detection& d : it->second) {
      if (d.origin == Origin::virtual_box) continue;
      if (same_box(d.box, ev.after.box) && d.label == ev.before.label) {
        ++report.flips_restored;
        break;
      }
    }
  }
  report.recovery = static_cast<double>(report.flips_restored) /
                    static_cast<double>(std::max(1, report.flips_total));

  // Anything corruption never touched should come back byte for byte.
  for (const auto& [frame, dets] : original.frames) {
    auto touched_it = touched.find(frame);
    auto refined_it = refined.frames.find(frame);
    for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
      if (touched_it != touched.end() && touched_it->second.count(i)) {
        continue;
      }
      const Detection& d = dets[i];
      bool intact = false;
      if (refined_it != refined.frames.end()) {
        for (const Detection& r : refined_it->second) {
          if (r.origin == Origin::virtual_box) continue;
          if (same_box(r.box, d.box) && r.label == d.label &&
              r.confidence == d.confidence) {
            intact = true;
            break;
          }
        }
      }
      if (!intact) {
        ++report.collateral_total;
        if (classes::is_protected(d.label)) ++report.collateral_protected;
      }
    }
  }
  return report;
}

}  // namespace detrefine
