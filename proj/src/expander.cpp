#include "detrefine/expander.hpp"

#include <algorithm>

namespace detrefine {
namespace {

bool is_rare(int label, const ExpanderConfig& cfg) {
  return std::find(cfg.rare_classes.begin(), cfg.rare_classes.end(), label) !=
         cfg.rare_classes.end();
}

Detection make_virtual(const Detection& seed, int label, double conf,
                       const BoundingBox& box) {
  Detection v;
  v.frame = seed.frame;
  v.box = box;
  v.label = label;
  v.confidence = conf;
  v.origin = Origin::virtual_box;
  return v;
}

}  // namespace

std::vector<Detection> dedup_overlaps(const std::vector<Detection>& dets,
                                      const ExpanderConfig& cfg) {
  const int n = static_cast<int>(dets.size());

  // Visit detections by descending confidence (ties keep input order) so
  // "keep the higher confidence one" falls out of plain suppression.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].confidence > dets[b].confidence;
  });

  std::vector<char> keep(n, 0);
  std::vector<int> kept;
  for (int i : order) {
    bool duplicate = false;
    for (int j : kept) {
      if (dets[j].label != dets[i].label) continue;
      if (iou(dets[j].box, dets[i].box) >= cfg.dedup_iou) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      keep[i] = 1;
      kept.push_back(i);
    }
  }

  std::vector<Detection> out;
  out.reserve(kept.size());
  for (int i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(dets[i]);
  }
  return out;
}

std::vector<Detection> expand_frame(const std::vector<Detection>& dets,
                                    const ExpanderConfig& cfg) {
  std::vector<Detection> out;
  out.reserve(dets.size() * 4);

  for (const Detection& d : dets) {
    out.push_back(d);

    if (d.label == classes::kMotorbike) {
      // A motorbike may carry any rider; seed every rider class at the
      // motorbike's own box with a floor confidence.
      for (int cl = 2; cl <= classes::kMax; ++cl) {
        out.push_back(make_virtual(d, cl, cfg.motor_conf, d.box));
      }
      continue;
    }
    if (!classes::is_human(d.label)) continue;

    for (int cl = classes::kMin; cl <= classes::kMax; ++cl) {
      if (cl == d.label) continue;

      double conf = cfg.human_conf_base;
      if (is_rare(cl, cfg)) conf += cfg.rare_offset;

      if (cl == 1 && (d.label == 2 || d.label == 3)) {
        // A driver implies a motorbike underneath.
        if (d.confidence > cfg.motor_gate) {
          out.push_back(make_virtual(d, cl, conf, d.box));
        }
      } else if (cl == 9 && (d.label == 2 || d.label == 3)) {
        // A confident driver may have a child seated in front, occupying
        // a smaller region of the same box.
        if (d.confidence > cfg.p0_gate) {
          out.push_back(
              make_virtual(d, cl, conf, scale_box(d.box, cfg.p0_scale)));
        }
      } else if (cl == 7 && d.label == 5) {
        // An unhelmeted first passenger suggests an unhelmeted second.
        if (d.confidence > cfg.p2_gate) {
          out.push_back(make_virtual(d, cl, conf, d.box));
        }
      } else if (cl >= 2 && cl <= 5) {
        // The common rider classes are always plausible alternatives.
        out.push_back(make_virtual(d, cl, conf, d.box));
      }
    }
  }
  return out;
}

std::vector<Detection> ranked_order(const std::vector<Detection>& dets) {
  std::vector<Detection> out = dets;
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) {
                     if (a.confidence != b.confidence)
                       return a.confidence > b.confidence;
                     if (a.origin != b.origin)
                       return static_cast<int>(a.origin) <
                              static_cast<int>(b.origin);
                     return a.label < b.label;
                   });
  return out;
}

std::vector<Detection> cap_top_k(const std::vector<Detection>& dets, int k) {
  std::vector<Detection> out = ranked_order(dets);
  if (k >= 0 && static_cast<int>(out.size()) > k) {
    out.resize(static_cast<std::size_t>(k));
  }
  return out;
}

}  // namespace detrefine
