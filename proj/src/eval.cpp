#include "detrefine/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "detrefine/expander.hpp"

namespace detrefine {
namespace {

struct RankedPred {
  double conf = 0.0;
  int video_id = 0;
  int frame = 0;
  int frame_rank = 0;  // position within the frame's capped list
  BoundingBox box;
};

}  // namespace

std::vector<FrameMatch> match_frame(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruth>& gts,
                                    double iou_thr) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].confidence > dets[b].confidence;
  });

  std::vector<char> taken(gts.size(), 0);
  std::vector<FrameMatch> out;
  out.reserve(dets.size());
  for (int di : order) {
    const Detection& d = dets[di];
    double best = -1.0;
    int best_gt = -1;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi] || gts[gi].label != d.label) continue;
      const double overlap = iou(d.box, gts[gi].box);
      if (overlap < iou_thr) continue;
      if (overlap > best) {
        best = overlap;
        best_gt = static_cast<int>(gi);
      }
    }
    FrameMatch m;
    m.det_index = di;
    if (best_gt >= 0) {
      taken[best_gt] = 1;
      m.gt_index = best_gt;
      m.is_tp = true;
    }
    out.push_back(m);
  }
  return out;
}

double average_precision(const std::vector<char>& tp_flags, int num_gt) {
  if (num_gt <= 0) return 0.0;

  const std::size_t n = tp_flags.size();
  std::vector<double> precision(n);
  int cum_tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tp_flags[i]) ++cum_tp;
    precision[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
  }
  // Envelope: best precision achievable at this rank or any later one.
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  double ap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tp_flags[i]) ap += precision[i];
  }
  return ap / static_cast<double>(num_gt);
}

EvalReport evaluate(const std::vector<FrameSet>& preds,
                    const std::vector<GroundTruth>& gts, int top_k,
                    double iou_thr) {
  EvalReport report;

  // Ground truth grouped by (video, frame, label) for matching, plus the
  // per-class totals that form each AP denominator.
  std::map<std::tuple<int, int, int>, std::vector<GroundTruth>> gt_index;
  std::map<int, int> gt_count;
  for (const GroundTruth& gt : gts) {
    gt_index[{gt.video_id, gt.frame, gt.label}].push_back(gt);
    ++gt_count[gt.label];
  }

  std::set<int> pred_videos;
  for (const FrameSet& fs : preds) pred_videos.insert(fs.video_id);
  std::set<int> orphan_videos;
  for (const GroundTruth& gt : gts) {
    if (!pred_videos.count(gt.video_id)) orphan_videos.insert(gt.video_id);
  }
  for (int v : orphan_videos) {
    report.warnings.push_back("ground truth video " + std::to_string(v) +
                              " has no predictions; its boxes count as "
                              "misses");
  }

  // Cap each frame, then pool the survivors per class in a global ranking:
  // confidence first, then video, frame, and position within the frame.
  std::map<int, std::vector<RankedPred>> per_class;
  for (const FrameSet& fs : preds) {
    for (const auto& [frame, dets] : fs.frames) {
      const std::vector<Detection> capped = cap_top_k(dets, top_k);
      for (int r = 0; r < static_cast<int>(capped.size()); ++r) {
        const Detection& d = capped[r];
        per_class[d.label].push_back(
            RankedPred{d.confidence, fs.video_id, frame, r, d.box});
      }
    }
  }

  double ap_sum = 0.0;
  int ap_classes = 0;
  for (int label = classes::kMin; label <= classes::kMax; ++label) {
    ClassCount& count = report.counts[label];
    count.num_gt = gt_count.count(label) ? gt_count[label] : 0;

    auto it = per_class.find(label);
    std::vector<RankedPred> ranked =
        it == per_class.end() ? std::vector<RankedPred>{} : it->second;
    std::sort(ranked.begin(), ranked.end(),
              [](const RankedPred& a, const RankedPred& b) {
                return std::make_tuple(-a.conf, a.video_id, a.frame,
                                       a.frame_rank) <
                       std::make_tuple(-b.conf, b.video_id, b.frame,
                                       b.frame_rank);
              });
    count.num_pred = static_cast<int>(ranked.size());

    // Group the global ranking by frame; within a group the order is still
    // confidence-descending, so per-frame greedy matching reproduces the
    // global greedy order.
    std::map<std::pair<int, int>, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      buckets[{ranked[i].video_id, ranked[i].frame}].push_back(i);
    }

    std::vector<char> tp_flags(ranked.size(), 0);
    static const std::vector<GroundTruth> no_gts;
    for (const auto& [key, positions] : buckets) {
      auto slot_it = gt_index.find({key.first, key.second, label});
      const std::vector<GroundTruth>& frame_gts =
          slot_it == gt_index.end() ? no_gts : slot_it->second;

      std::vector<Detection> frame_dets;
      frame_dets.reserve(positions.size());
      for (std::size_t pos : positions) {
        Detection d;
        d.frame = key.second;
        d.box = ranked[pos].box;
        d.label = label;
        d.confidence = ranked[pos].conf;
        frame_dets.push_back(d);
      }
      for (const FrameMatch& m : match_frame(frame_dets, frame_gts, iou_thr)) {
        if (m.is_tp) tp_flags[positions[m.det_index]] = 1;
      }
    }
    for (char f : tp_flags) {
      if (f) {
        ++count.tp;
      } else {
        ++count.fp;
      }
    }
    count.fn = count.num_gt - count.tp;

    if (count.num_gt > 0) {
      const double ap = average_precision(tp_flags, count.num_gt);
      report.per_class_ap[label] = ap;
      ap_sum += ap;
      ++ap_classes;
    } else {
      report.classes_absent.push_back(label);
    }
  }

  if (ap_classes > 0) {
    report.map50 = ap_sum / static_cast<double>(ap_classes);
  } else {
    report.warnings.push_back("no ground truth for any valid class");
  }
  return report;
}

EvalReport evaluate(const FrameSet& pred, const std::vector<GroundTruth>& gts,
                    int top_k, double iou_thr) {
  return evaluate(std::vector<FrameSet>{pred}, gts, top_k, iou_thr);
}

}  // namespace detrefine
