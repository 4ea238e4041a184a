#pragma once

#include <string>
#include <vector>

#include "detrefine/tracker.hpp"
#include "detrefine/types.hpp"

namespace detrefine::testing {

inline Detection det(int frame, double left, double top, double width,
                     double height, int label, double conf,
                     Origin origin = Origin::detector) {
  Detection d;
  d.frame = frame;
  d.box = BoundingBox{left, top, width, height};
  d.label = label;
  d.confidence = conf;
  d.origin = origin;
  return d;
}

// A FrameSet holding one frame per entry of `per_frame`, frames numbered
// from `first_frame` upward.
inline FrameSet frameset(int video_id,
                         const std::vector<std::vector<Detection>>& per_frame,
                         int first_frame = 1) {
  FrameSet fs;
  fs.video_id = video_id;
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    for (Detection d : per_frame[i]) {
      d.frame = first_frame + static_cast<int>(i);
      fs.add(d);
    }
  }
  return fs;
}

// A track whose history simply points at the given (frame, det_index)
// slots of a FrameSet; the filter state is irrelevant for label logic.
inline Track track_over(int id, const FrameSet& fs,
                        const std::vector<std::pair<int, int>>& slots) {
  Track t;
  t.id = id;
  for (const auto& [frame, index] : slots) {
    TrackObservation obs;
    obs.frame = frame;
    obs.det_index = index;
    obs.det = fs.frames.at(frame)[static_cast<std::size_t>(index)];
    t.history.push_back(obs);
  }
  if (!t.history.empty()) t.last_frame = t.history.back().frame;
  t.hit_count = static_cast<int>(t.history.size());
  t.status = TrackStatus::active;
  return t;
}

inline bool same_box(const BoundingBox& a, const BoundingBox& b) {
  return a.left == b.left && a.top == b.top && a.width == b.width &&
         a.height == b.height;
}

inline bool same_detection(const Detection& a, const Detection& b) {
  return a.frame == b.frame && same_box(a.box, b.box) && a.label == b.label &&
         a.confidence == b.confidence && a.origin == b.origin;
}

inline bool same_frameset(const FrameSet& a, const FrameSet& b) {
  if (a.video_id != b.video_id) return false;
  if (a.frames.size() != b.frames.size()) return false;
  for (const auto& [frame, dets] : a.frames) {
    auto it = b.frames.find(frame);
    if (it == b.frames.end() || it->second.size() != dets.size()) return false;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (!same_detection(dets[i], it->second[i])) return false;
    }
  }
  return true;
}

}  // namespace detrefine::testing
