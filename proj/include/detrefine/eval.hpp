#pragma once

#include <map>
#include <string>
#include <vector>

#include "detrefine/types.hpp"

namespace detrefine {

struct GroundTruth {
  int video_id = 0;
  int frame = 0;
  BoundingBox box;
  int label = 0;
};

struct ClassCount {
  int num_gt = 0;
  int num_pred = 0;  // predictions surviving the per-frame cap
  int tp = 0;
  int fp = 0;
  int fn = 0;  // ground truth boxes left unmatched
};

struct FrameMatch {
  int det_index = 0;  // into the input detections
  int gt_index = -1;  // into the input ground truth, -1 when unmatched
  bool is_tp = false;
};

struct EvalReport {
  std::map<int, double> per_class_ap;  // only classes with ground truth
  double map50 = 0.0;
  std::map<int, ClassCount> counts;
  std::vector<int> classes_absent;  // valid classes with no ground truth
  std::vector<std::string> warnings;
};

// Greedy matching within one frame: detections in descending confidence
// order (ties keep input order) each claim the unmatched same-class ground
// truth box with the highest overlap at or above iou_thr. Rows come back
// in that processing order, one per detection.
std::vector<FrameMatch> match_frame(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruth>& gts,
                                    double iou_thr = 0.5);

// Area under the precision-recall curve with the precision envelope
// (each precision replaced by the best precision at equal or higher
// rank), evaluated at every true positive. tp_flags is the per-rank
// hit list, best rank first.
double average_precision(const std::vector<char>& tp_flags, int num_gt);

// Score predictions against ground truth at a fixed IoU threshold. Each
// frame keeps only its top_k highest ranked detections. Within a class,
// predictions rank globally by confidence and match per frame via
// match_frame. The summary score averages AP over classes that appear in
// the ground truth.
EvalReport evaluate(const std::vector<FrameSet>& preds,
                    const std::vector<GroundTruth>& gts, int top_k = 100,
                    double iou_thr = 0.5);
EvalReport evaluate(const FrameSet& pred, const std::vector<GroundTruth>& gts,
                    int top_k = 100, double iou_thr = 0.5);

}  // namespace detrefine
