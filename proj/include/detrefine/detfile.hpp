#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "detrefine/adaptive_labeling.hpp"
#include "detrefine/eval.hpp"
#include "detrefine/harness.hpp"
#include "detrefine/types.hpp"

namespace detrefine {

// Filesystem-level failure (cannot open, cannot write). Distinct from
// ValidationError so callers can map the two to different exit codes.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Detection rows: video_id,frame,bb_left,bb_top,bb_width,bb_height,class,
// confidence. Ground truth rows drop the confidence column. Blank lines
// are ignored. A malformed line is rejected: its diagnostic ("source:line:
// why") is appended to `rejects` when given, and with strict=true the
// first one raises ValidationError instead.
std::vector<FrameSet> parse_detections(std::istream& in,
                                       const std::string& source_name,
                                       bool strict = false,
                                       std::vector<std::string>* rejects = nullptr);
std::vector<FrameSet> load_detections(const std::string& path,
                                      bool strict = false,
                                      std::vector<std::string>* rejects = nullptr);

std::vector<GroundTruth> parse_ground_truth(std::istream& in,
                                            const std::string& source_name,
                                            bool strict = false,
                                            std::vector<std::string>* rejects = nullptr);
std::vector<GroundTruth> load_ground_truth(const std::string& path,
                                           bool strict = false,
                                           std::vector<std::string>* rejects = nullptr);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

// Canonical output: videos by id, frames ascending, detections in ranked
// order within each frame.
void write_detections(std::ostream& out, const std::vector<FrameSet>& videos);
void save_detections(const std::string& path,
                     const std::vector<FrameSet>& videos);

void write_ground_truth(std::ostream& out,
                        const std::vector<GroundTruth>& gts);
void save_ground_truth(const std::string& path,
                       const std::vector<GroundTruth>& gts);

// Correction journal rows, one per entry, paired with their video id.
void write_corrections(
    std::ostream& out,
    const std::vector<std::pair<int, Correction>>& entries);

// Corruption journal rows for synthetic data runs.
void write_corruption_journal(std::ostream& out,
                              const std::vector<CorruptionEvent>& journal);

// Human-readable evaluation summary, one class per line plus the mean.
void write_eval_report(std::ostream& out, const EvalReport& report);

// Same content as a JSON document.
std::string eval_report_json(const EvalReport& report);

}  // namespace detrefine
