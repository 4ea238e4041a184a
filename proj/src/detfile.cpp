#include "detrefine/detfile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "detrefine/expander.hpp"

namespace detrefine {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

// Carries one line's diagnostic up to the rejection handler.
struct BadLine {
  std::string message;
};

[[noreturn]] void fail(const std::string& source, int line,
                       const std::string& what) {
  throw BadLine{source + ":" + std::to_string(line) + ": " + what};
}

long parse_int(std::string_view field, const std::string& source, int line,
               const char* what) {
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    fail(source, line, std::string("bad ") + what + " '" +
                           std::string(field) + "'");
  }
  return value;
}

double parse_num(std::string_view field, const std::string& source, int line,
                 const char* what) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(value)) {
    fail(source, line, std::string("bad ") + what + " '" +
                           std::string(field) + "'");
  }
  return value;
}

struct Row {
  int video_id;
  int frame;
  BoundingBox box;
  int label;
  double confidence;  // untouched for ground truth rows
};

// Shared validation for both file kinds; `columns` is 8 with confidence,
// 7 without.
bool parse_row(const std::string& raw, int line_no, const std::string& source,
               int columns, Row& row) {
  const std::string_view line = trim(raw);
  if (line.empty()) return false;
  const std::vector<std::string_view> f = split_fields(line);
  if (static_cast<int>(f.size()) != columns) {
    fail(source, line_no,
         "expected " + std::to_string(columns) + " fields, got " +
             std::to_string(f.size()));
  }

  const long video = parse_int(f[0], source, line_no, "video id");
  const long frame = parse_int(f[1], source, line_no, "frame");
  if (video < 0) fail(source, line_no, "negative video id");
  if (frame < 0) fail(source, line_no, "negative frame");

  row.video_id = static_cast<int>(video);
  row.frame = static_cast<int>(frame);
  row.box.left = parse_num(f[2], source, line_no, "left");
  row.box.top = parse_num(f[3], source, line_no, "top");
  row.box.width = parse_num(f[4], source, line_no, "width");
  row.box.height = parse_num(f[5], source, line_no, "height");
  if (!(row.box.width > 0.0) || !(row.box.height > 0.0)) {
    fail(source, line_no, "box must have positive width and height");
  }

  const long label = parse_int(f[6], source, line_no, "class");
  if (!classes::valid(static_cast<int>(label))) {
    fail(source, line_no, "class " + std::to_string(label) +
                              " outside 1.." + std::to_string(classes::kMax));
  }
  row.label = static_cast<int>(label);

  if (columns == 8) {
    row.confidence = parse_num(f[7], source, line_no, "confidence");
    if (row.confidence < 0.0 || row.confidence > 1.0) {
      fail(source, line_no, "confidence outside [0, 1]");
    }
  }
  return true;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

const char* action_name(CorrectionAction a) {
  return a == CorrectionAction::relabel ? "relabel" : "remove";
}

const char* kind_name(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::flip: return "flip";
    case CorruptionKind::drop: return "drop";
    default: return "jitter";
  }
}

}  // namespace

std::vector<FrameSet> parse_detections(std::istream& in,
                                       const std::string& source_name,
                                       bool strict,
                                       std::vector<std::string>* rejects) {
  std::map<int, FrameSet> videos;
  std::string raw;
  int line_no = 0;
  Row row;
  while (std::getline(in, raw)) {
    ++line_no;
    try {
      if (!parse_row(raw, line_no, source_name, 8, row)) continue;
    } catch (const BadLine& bad) {
      if (strict) throw ValidationError(bad.message);
      if (rejects) rejects->push_back(bad.message);
      continue;
    }
    Detection d;
    d.frame = row.frame;
    d.box = row.box;
    d.label = row.label;
    d.confidence = row.confidence;
    d.origin = Origin::detector;
    FrameSet& fs = videos[row.video_id];
    fs.video_id = row.video_id;
    fs.add(d);
  }

  std::vector<FrameSet> out;
  out.reserve(videos.size());
  for (auto& [id, fs] : videos) out.push_back(std::move(fs));
  return out;
}

std::vector<FrameSet> load_detections(const std::string& path, bool strict,
                                      std::vector<std::string>* rejects) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_detections(in, path, strict, rejects);
}

std::vector<GroundTruth> parse_ground_truth(std::istream& in,
                                            const std::string& source_name,
                                            bool strict,
                                            std::vector<std::string>* rejects) {
  std::vector<GroundTruth> out;
  std::string raw;
  int line_no = 0;
  Row row;
  while (std::getline(in, raw)) {
    ++line_no;
    try {
      if (!parse_row(raw, line_no, source_name, 7, row)) continue;
    } catch (const BadLine& bad) {
      if (strict) throw ValidationError(bad.message);
      if (rejects) rejects->push_back(bad.message);
      continue;
    }
    out.push_back(GroundTruth{row.video_id, row.frame, row.box, row.label});
  }
  return out;
}

std::vector<GroundTruth> load_ground_truth(const std::string& path,
                                           bool strict,
                                           std::vector<std::string>* rejects) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_ground_truth(in, path, strict, rejects);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_detections(std::ostream& out,
                      const std::vector<FrameSet>& videos) {
  std::vector<const FrameSet*> order;
  order.reserve(videos.size());
  for (const FrameSet& fs : videos) order.push_back(&fs);
  std::sort(order.begin(), order.end(), [](const FrameSet* a,
                                           const FrameSet* b) {
    return a->video_id < b->video_id;
  });

  for (const FrameSet* fs : order) {
    for (const auto& [frame, dets] : fs->frames) {
      for (const Detection& d : ranked_order(dets)) {
        out << fs->video_id << ',' << frame << ','
            << format_double(d.box.left) << ',' << format_double(d.box.top)
            << ',' << format_double(d.box.width) << ','
            << format_double(d.box.height) << ',' << d.label << ','
            << format_double(d.confidence) << '\n';
      }
    }
  }
}

void save_detections(const std::string& path,
                     const std::vector<FrameSet>& videos) {
  std::ofstream out = open_out(path);
  write_detections(out, videos);
  if (!out) throw IoError("failed writing " + path);
}

void write_ground_truth(std::ostream& out,
                        const std::vector<GroundTruth>& gts) {
  std::vector<const GroundTruth*> order;
  order.reserve(gts.size());
  for (const GroundTruth& gt : gts) order.push_back(&gt);
  std::stable_sort(order.begin(), order.end(),
                   [](const GroundTruth* a, const GroundTruth* b) {
                     if (a->video_id != b->video_id)
                       return a->video_id < b->video_id;
                     return a->frame < b->frame;
                   });
  for (const GroundTruth* gt : order) {
    out << gt->video_id << ',' << gt->frame << ','
        << format_double(gt->box.left) << ',' << format_double(gt->box.top)
        << ',' << format_double(gt->box.width) << ','
        << format_double(gt->box.height) << ',' << gt->label << '\n';
  }
}

void save_ground_truth(const std::string& path,
                       const std::vector<GroundTruth>& gts) {
  std::ofstream out = open_out(path);
  write_ground_truth(out, gts);
  if (!out) throw IoError("failed writing " + path);
}

void write_corrections(
    std::ostream& out,
    const std::vector<std::pair<int, Correction>>& entries) {
  for (const auto& [video_id, c] : entries) {
    out << video_id << ',' << c.frame << ',' << c.track_id << ','
        << action_name(c.action) << ',' << c.old_label << ',' << c.new_label
        << ',' << format_double(c.old_conf) << ','
        << format_double(c.new_conf) << '\n';
  }
}

void write_corruption_journal(std::ostream& out,
                              const std::vector<CorruptionEvent>& journal) {
  for (const CorruptionEvent& ev : journal) {
    out << kind_name(ev.kind) << ',' << ev.frame << ',' << ev.det_index
        << ',' << ev.before.label << ',' << format_double(ev.before.confidence)
        << ',' << ev.after.label << ',' << format_double(ev.after.confidence)
        << '\n';
  }
}

void write_eval_report(std::ostream& out, const EvalReport& report) {
  for (const auto& [label, count] : report.counts) {
    out << "class " << label << " (" << classes::name(label) << "): ";
    auto ap = report.per_class_ap.find(label);
    if (ap != report.per_class_ap.end()) {
      out << "ap50=" << format_double(ap->second);
    } else {
      out << "ap50=n/a";
    }
    out << " gt=" << count.num_gt << " pred=" << count.num_pred
        << " tp=" << count.tp << " fp=" << count.fp << " fn=" << count.fn
        << '\n';
  }
  if (!report.classes_absent.empty()) {
    out << "absent:";
    for (int label : report.classes_absent) out << ' ' << label;
    out << '\n';
  }
  out << "map50=" << format_double(report.map50) << '\n';
  for (const std::string& w : report.warnings) {
    out << "warning: " << w << '\n';
  }
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json j;
  j["map50"] = report.map50;
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [label, ap] : report.per_class_ap) {
    per_class[std::to_string(label)] = ap;
  }
  j["per_class_ap"] = per_class;
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [label, c] : report.counts) {
    counts[std::to_string(label)] = {{"num_gt", c.num_gt},
                                     {"num_pred", c.num_pred},
                                     {"tp", c.tp},
                                     {"fp", c.fp},
                                     {"fn", c.fn}};
  }
  j["counts"] = counts;
  j["classes_absent"] = report.classes_absent;
  j["warnings"] = report.warnings;
  return j.dump(2);
}

}  // namespace detrefine
