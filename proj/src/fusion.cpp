#include "detrefine/fusion.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace detrefine {
namespace {

struct Member {
  Detection det;
  double eff_conf = 0.0;  // confidence times its source weight
};

struct Cluster {
  int label = 0;
  std::vector<Member> members;
  double weight_sum = 0.0;
  BoundingBox box{};  // running weighted average of member boxes

  void add(const Member& m) {
    members.push_back(m);
    const double prev = weight_sum;
    weight_sum += m.eff_conf;
    if (weight_sum <= 0.0) {
      // Degenerate all-zero cluster: fall back to a plain running mean so
      // the box stays defined.
      const double n = static_cast<double>(members.size());
      box.left = box.left + (m.det.box.left - box.left) / n;
      box.top = box.top + (m.det.box.top - box.top) / n;
      box.width = box.width + (m.det.box.width - box.width) / n;
      box.height = box.height + (m.det.box.height - box.height) / n;
      return;
    }
    auto mix = [&](double acc, double v) {
      return (acc * prev + v * m.eff_conf) / weight_sum;
    };
    if (members.size() == 1) {
      box = m.det.box;
    } else {
      box = BoundingBox{mix(box.left, m.det.box.left),
                        mix(box.top, m.det.box.top),
                        mix(box.width, m.det.box.width),
                        mix(box.height, m.det.box.height)};
    }
  }
};

}  // namespace

std::vector<Detection> fuse_frame(
    const std::vector<std::vector<Detection>>& sources,
    const FusionConfig& cfg) {
  const std::size_t n_sources = sources.size();
  if (!cfg.source_weights.empty() &&
      cfg.source_weights.size() != n_sources) {
    throw ValidationError("fusion weights do not match the source count");
  }
  if (n_sources == 0) return {};

  std::vector<Member> pool;
  for (std::size_t s = 0; s < n_sources; ++s) {
    const double w =
        cfg.source_weights.empty() ? 1.0 : cfg.source_weights[s];
    for (const Detection& d : sources[s]) {
      if (d.confidence < cfg.skip_box_thr) continue;
      pool.push_back(Member{d, d.confidence * w});
    }
  }

  // Order the pool by keys that do not mention the source, so permuting
  // the sources cannot change the result.
  std::sort(pool.begin(), pool.end(), [](const Member& a, const Member& b) {
    return std::make_tuple(-a.eff_conf, a.det.label, a.det.box.left,
                           a.det.box.top, a.det.box.width, a.det.box.height,
                           -a.det.confidence) <
           std::make_tuple(-b.eff_conf, b.det.label, b.det.box.left,
                           b.det.box.top, b.det.box.width, b.det.box.height,
                           -b.det.confidence);
  });

  std::vector<Cluster> clusters;
  for (const Member& m : pool) {
    Cluster* home = nullptr;
    for (Cluster& c : clusters) {
      if (c.label != m.det.label) continue;
      if (iou(c.box, m.det.box) >= cfg.iou_thr) {
        home = &c;
        break;
      }
    }
    if (home == nullptr) {
      clusters.emplace_back();
      clusters.back().label = m.det.label;
      home = &clusters.back();
    }
    home->add(m);
  }

  std::vector<Detection> out;
  out.reserve(clusters.size());
  for (const Cluster& c : clusters) {
    double eff_sum = 0.0;
    int frame = c.members.front().det.frame;
    for (const Member& m : c.members) eff_sum += m.eff_conf;
    const double t = static_cast<double>(c.members.size());

    Detection d;
    d.frame = frame;
    d.box = c.box;
    d.label = c.label;
    d.confidence = (eff_sum / t) *
                   std::min(1.0, t / static_cast<double>(n_sources));
    d.origin = Origin::detector;
    out.push_back(d);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) {
                     if (a.confidence != b.confidence)
                       return a.confidence > b.confidence;
                     return a.label < b.label;
                   });
  return out;
}

FrameSet fuse_video(const std::vector<FrameSet>& sources,
                    const FusionConfig& cfg) {
  FrameSet out;
  if (sources.empty()) return out;
  out.video_id = sources.front().video_id;
  for (const FrameSet& fs : sources) {
    if (fs.video_id != out.video_id) {
      throw ValidationError("fusion sources disagree on the video id");
    }
  }

  std::set<int> frames;
  for (const FrameSet& fs : sources) {
    for (const auto& [f, dets] : fs.frames) frames.insert(f);
  }

  const std::vector<Detection> empty;
  for (int f : frames) {
    std::vector<std::vector<Detection>> per_source;
    per_source.reserve(sources.size());
    for (const FrameSet& fs : sources) {
      auto it = fs.frames.find(f);
      per_source.push_back(it == fs.frames.end() ? empty : it->second);
    }
    std::vector<Detection> fused = fuse_frame(per_source, cfg);
    for (Detection& d : fused) d.frame = f;
    if (!fused.empty()) out.frames.emplace(f, std::move(fused));
  }
  return out;
}

}  // namespace detrefine
