#include "detrefine/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "detrefine/detfile.hpp"

namespace detrefine {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw ValidationError(source + ": " + what);
}

json parse_json(const std::string& text, const std::string& source) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(source, "not valid JSON");
  if (!j.is_object()) fail(source, "top level must be an object");
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double want_num(const json& v, const std::string& source,
                const std::string& key) {
  if (!v.is_number()) fail(source, key + " must be a number");
  return v.get<double>();
}

int want_int(const json& v, const std::string& source,
             const std::string& key) {
  if (!v.is_number_integer()) fail(source, key + " must be an integer");
  return v.get<int>();
}

bool want_bool(const json& v, const std::string& source,
               const std::string& key) {
  if (!v.is_boolean()) fail(source, key + " must be true or false");
  return v.get<bool>();
}

std::vector<double> want_num_list(const json& v, const std::string& source,
                                  const std::string& key) {
  if (!v.is_array()) fail(source, key + " must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) out.push_back(want_num(e, source, key));
  return out;
}

std::vector<int> want_int_list(const json& v, const std::string& source,
                               const std::string& key) {
  if (!v.is_array()) fail(source, key + " must be an array of integers");
  std::vector<int> out;
  for (const json& e : v) out.push_back(want_int(e, source, key));
  return out;
}

void read_tracker(const json& j, const std::string& source,
                  TrackerConfig& cfg) {
  for (const auto& [key, v] : j.items()) {
    if (key == "det_thresh") cfg.det_thresh = want_num(v, source, key);
    else if (key == "iou_threshold") cfg.iou_threshold = want_num(v, source, key);
    else if (key == "strict_gate") cfg.strict_gate = want_bool(v, source, key);
    else if (key == "max_age") cfg.max_age = want_int(v, source, key);
    else if (key == "min_hits") cfg.min_hits = want_int(v, source, key);
    else if (key == "momentum_window") cfg.momentum_window = want_int(v, source, key);
    else if (key == "momentum_weight") cfg.momentum_weight = want_num(v, source, key);
    else fail(source, "unknown tracker key '" + key + "'");
  }
}

void read_refine(const json& j, const std::string& source,
                 RefineConfig& cfg) {
  for (const auto& [key, v] : j.items()) {
    if (key == "theta0") cfg.theta0 = want_num(v, source, key);
    else if (key == "alpha") cfg.alpha = want_num(v, source, key);
    else if (key == "theta_q") cfg.theta_q = want_num(v, source, key);
    else if (key == "lambda") cfg.lambda = want_num(v, source, key);
    else if (key == "spatial_iou") cfg.spatial_iou = want_num(v, source, key);
    else if (key == "match_conf_min") cfg.match_conf_min = want_num(v, source, key);
    else if (key == "area_min") cfg.area_min = want_num(v, source, key);
    else fail(source, "unknown refine key '" + key + "'");
  }
}

void read_expander(const json& j, const std::string& source,
                   ExpanderConfig& cfg) {
  for (const auto& [key, v] : j.items()) {
    if (key == "dedup_iou") cfg.dedup_iou = want_num(v, source, key);
    else if (key == "motor_conf") cfg.motor_conf = want_num(v, source, key);
    else if (key == "human_conf_base") cfg.human_conf_base = want_num(v, source, key);
    else if (key == "rare_offset") cfg.rare_offset = want_num(v, source, key);
    else if (key == "rare_classes") cfg.rare_classes = want_int_list(v, source, key);
    else if (key == "p0_scale") cfg.p0_scale = want_num(v, source, key);
    else if (key == "motor_gate") cfg.motor_gate = want_num(v, source, key);
    else if (key == "p0_gate") cfg.p0_gate = want_num(v, source, key);
    else if (key == "p2_gate") cfg.p2_gate = want_num(v, source, key);
    else fail(source, "unknown expander key '" + key + "'");
  }
}

void read_fusion(const json& j, const std::string& source,
                 FusionConfig& cfg) {
  for (const auto& [key, v] : j.items()) {
    if (key == "iou_thr") cfg.iou_thr = want_num(v, source, key);
    else if (key == "skip_box_thr") cfg.skip_box_thr = want_num(v, source, key);
    else if (key == "source_weights") cfg.source_weights = want_num_list(v, source, key);
    else fail(source, "unknown fusion key '" + key + "'");
  }
}

void read_corruption(const json& j, const std::string& source,
                     CorruptionSpec& spec) {
  for (const auto& [key, v] : j.items()) {
    if (key == "flip_rate") spec.flip_rate = want_num(v, source, key);
    else if (key == "flip_conf") spec.flip_conf = want_num(v, source, key);
    else if (key == "drop_rate") spec.drop_rate = want_num(v, source, key);
    else if (key == "jitter_px") spec.jitter_px = want_num(v, source, key);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(want_num(v, source, key));
    else if (key == "flip_targets") spec.flip_targets = want_int_list(v, source, key);
    else if (key == "flip_mode") {
      if (!v.is_string()) fail(source, "flip_mode must be a string");
      const std::string mode = v.get<std::string>();
      if (mode == "per_detection") spec.flip_mode = FlipMode::per_detection;
      else if (mode == "one_per_track") spec.flip_mode = FlipMode::one_per_track;
      else fail(source, "unknown flip_mode '" + mode + "'");
    } else {
      fail(source, "unknown corruption key '" + key + "'");
    }
  }
}

ActorSpec read_actor(const json& j, const std::string& source) {
  if (!j.is_object()) fail(source, "each actor must be an object");
  ActorSpec a;
  for (const auto& [key, v] : j.items()) {
    if (key == "identity") a.identity = want_int(v, source, key);
    else if (key == "label") a.label = want_int(v, source, key);
    else if (key == "start_cx") a.start_cx = want_num(v, source, key);
    else if (key == "start_cy") a.start_cy = want_num(v, source, key);
    else if (key == "vx") a.vx = want_num(v, source, key);
    else if (key == "vy") a.vy = want_num(v, source, key);
    else if (key == "width") a.width = want_num(v, source, key);
    else if (key == "height") a.height = want_num(v, source, key);
    else fail(source, "unknown actor key '" + key + "'");
  }
  return a;
}

OcclusionWindow read_occlusion(const json& j, const std::string& source) {
  if (!j.is_object()) fail(source, "each occlusion must be an object");
  OcclusionWindow w;
  for (const auto& [key, v] : j.items()) {
    if (key == "identity") w.identity = want_int(v, source, key);
    else if (key == "first_frame") w.first_frame = want_int(v, source, key);
    else if (key == "last_frame") w.last_frame = want_int(v, source, key);
    else fail(source, "unknown occlusion key '" + key + "'");
  }
  return w;
}

// Reject configurations no stage can operate under.
void check_invariants(const PipelineConfig& cfg, const std::string& source) {
  const TrackerConfig& t = cfg.tracker;
  if (t.det_thresh < 0.0 || t.det_thresh > 1.0)
    fail(source, "det_thresh must be in [0, 1]");
  if (t.iou_threshold <= 0.0 || t.iou_threshold > 1.0)
    fail(source, "iou_threshold must be in (0, 1]");
  if (t.max_age < 1) fail(source, "max_age must be at least 1");
  if (t.min_hits < 1) fail(source, "min_hits must be at least 1");
  if (t.momentum_window < 1) fail(source, "momentum_window must be at least 1");

  const RefineConfig& r = cfg.refine;
  if (r.theta0 < 0.0 || r.theta0 > 1.0)
    fail(source, "theta0 must be in [0, 1]");
  if (r.theta_q < 0.0 || r.theta_q > 1.0)
    fail(source, "theta_q must be in [0, 1]");
  if (r.lambda <= 0.0 || r.lambda >= 1.0)
    fail(source, "lambda must be in (0, 1)");
  if (r.spatial_iou <= 0.0 || r.spatial_iou > 1.0)
    fail(source, "spatial_iou must be in (0, 1]");
  if (r.area_min < 0.0) fail(source, "area_min must not be negative");

  const ExpanderConfig& e = cfg.expander;
  if (e.dedup_iou <= 0.0 || e.dedup_iou > 1.0)
    fail(source, "dedup_iou must be in (0, 1]");
  if (e.p0_scale <= 0.0) fail(source, "p0_scale must be positive");
  for (int cl : e.rare_classes) {
    if (!classes::valid(cl)) {
      fail(source, "rare_classes entry " + std::to_string(cl) +
                       " is not a valid class");
    }
  }

  const FusionConfig& f = cfg.fusion;
  if (f.iou_thr <= 0.0 || f.iou_thr >= 1.0)
    fail(source, "fusion iou_thr must be in (0, 1)");
  for (double w : f.source_weights) {
    if (!(w > 0.0)) fail(source, "fusion weights must be positive");
  }

  if (cfg.top_k < 0) fail(source, "top_k must not be negative");
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text,
                                     const std::string& source_name) {
  const json j = parse_json(text, source_name);
  PipelineConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "defaults") {
      // The built-in constants are the only profile; naming it is allowed
      // so configs can state their baseline explicitly.
      if (!v.is_string() || v.get<std::string>() != "standard") {
        fail(source_name, "the only defaults profile is \"standard\"");
      }
    }
    else if (key == "tracker") read_tracker(v, source_name, cfg.tracker);
    else if (key == "refine") read_refine(v, source_name, cfg.refine);
    else if (key == "expander") read_expander(v, source_name, cfg.expander);
    else if (key == "fusion") read_fusion(v, source_name, cfg.fusion);
    else if (key == "top_k") cfg.top_k = want_int(v, source_name, key);
    else if (key == "enable_adaptive_labeling")
      cfg.enable_adaptive_labeling = want_bool(v, source_name, key);
    else if (key == "enable_expander")
      cfg.enable_expander = want_bool(v, source_name, key);
    else if (key == "enable_fusion")
      cfg.enable_fusion = want_bool(v, source_name, key);
    else fail(source_name, "unknown key '" + key + "'");
  }
  check_invariants(cfg, source_name);
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  return parse_pipeline_config(read_file(path), path);
}

ScenarioFile parse_scenario(const std::string& text,
                            const std::string& source_name) {
  const json j = parse_json(text, source_name);
  ScenarioFile file;
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") file.scenario.seed = static_cast<std::uint64_t>(want_num(v, source_name, key));
    else if (key == "num_frames") file.scenario.num_frames = want_int(v, source_name, key);
    else if (key == "extent_w") file.scenario.extent_w = want_num(v, source_name, key);
    else if (key == "extent_h") file.scenario.extent_h = want_num(v, source_name, key);
    else if (key == "video_id") file.scenario.video_id = want_int(v, source_name, key);
    else if (key == "det_conf") file.scenario.det_conf = want_num(v, source_name, key);
    else if (key == "actors") {
      if (!v.is_array()) fail(source_name, "actors must be an array");
      for (const json& e : v) {
        file.scenario.actors.push_back(read_actor(e, source_name));
      }
    } else if (key == "occlusions") {
      if (!v.is_array()) fail(source_name, "occlusions must be an array");
      for (const json& e : v) {
        file.scenario.occlusions.push_back(read_occlusion(e, source_name));
      }
    } else if (key == "corruption") {
      read_corruption(v, source_name, file.corruption);
      file.has_corruption = true;
    } else {
      fail(source_name, "unknown key '" + key + "'");
    }
  }
  return file;
}

ScenarioFile load_scenario(const std::string& path) {
  return parse_scenario(read_file(path), path);
}

}  // namespace detrefine
