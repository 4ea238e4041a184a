#include <string>

#include <doctest.h>

#include "detrefine/config.hpp"
#include "detrefine/detfile.hpp"

using namespace detrefine;

namespace {

PipelineConfig parse(const std::string& text) {
  return parse_pipeline_config(text, "cfg");
}

}  // namespace

TEST_CASE("an empty object keeps every default") {
  const PipelineConfig cfg = parse("{}");
  CHECK(cfg.tracker.det_thresh == 0.3);
  CHECK(cfg.tracker.iou_threshold == 0.85);
  CHECK(cfg.tracker.max_age == 10);
  CHECK(cfg.tracker.min_hits == 1);
  CHECK_FALSE(cfg.tracker.strict_gate);
  CHECK(cfg.refine.theta0 == 0.3);
  CHECK(cfg.refine.alpha == 0.35);
  CHECK(cfg.refine.theta_q == 0.4);
  CHECK(cfg.refine.lambda == 0.1);
  CHECK(cfg.refine.spatial_iou == 0.8);
  CHECK(cfg.refine.area_min == 2500.0);
  CHECK(cfg.expander.dedup_iou == 0.8);
  CHECK(cfg.expander.motor_conf == 1e-5);
  CHECK(cfg.expander.p0_scale == 0.7);
  CHECK(cfg.fusion.iou_thr == 0.55);
  CHECK(cfg.top_k == 100);
  CHECK(cfg.enable_adaptive_labeling);
  CHECK(cfg.enable_expander);
  CHECK(cfg.enable_fusion);
}

TEST_CASE("a single key override leaves the rest alone") {
  const PipelineConfig cfg = parse(R"({"tracker": {"det_thresh": 0.1}})");
  CHECK(cfg.tracker.det_thresh == 0.1);
  CHECK(cfg.tracker.iou_threshold == 0.85);
  CHECK(cfg.refine.theta0 == 0.3);
}

TEST_CASE("every section accepts its own keys") {
  const PipelineConfig cfg = parse(R"({
    "tracker": {"max_age": 5, "strict_gate": true, "momentum_weight": 0.3},
    "refine": {"theta0": 0.25, "lambda": 0.2, "area_min": 1000},
    "expander": {"rare_classes": [4, 6], "p0_gate": 0.2},
    "fusion": {"iou_thr": 0.6, "source_weights": [2, 1]},
    "top_k": 50,
    "enable_fusion": false,
    "defaults": "standard"
  })");
  CHECK(cfg.tracker.max_age == 5);
  CHECK(cfg.tracker.strict_gate);
  CHECK(cfg.refine.lambda == 0.2);
  CHECK(cfg.expander.rare_classes == std::vector<int>{4, 6});
  CHECK(cfg.fusion.source_weights == std::vector<double>{2.0, 1.0});
  CHECK(cfg.top_k == 50);
  CHECK_FALSE(cfg.enable_fusion);
}

TEST_CASE("unknown keys are rejected wherever they appear") {
  CHECK_THROWS_AS(parse(R"({"trackr": {}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"tracker": {"det_tresh": 0.1}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"refine": {"gamma": 1}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"expander": {"x": 1}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"fusion": {"weights": []}})"), ValidationError);
}

TEST_CASE("type errors and broken json are rejected") {
  CHECK_THROWS_AS(parse("not json"), ValidationError);
  CHECK_THROWS_AS(parse("[1, 2]"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"top_k": "many"})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"tracker": {"max_age": 2.5}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"enable_fusion": 1})"), ValidationError);
}

TEST_CASE("out-of-range values are rejected") {
  CHECK_THROWS_AS(parse(R"({"tracker": {"det_thresh": 1.5}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"tracker": {"iou_threshold": 0.0}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"tracker": {"max_age": 0}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"refine": {"lambda": 1.0}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"refine": {"theta0": -0.1}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"expander": {"dedup_iou": 0.0}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"expander": {"rare_classes": [12]}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"fusion": {"iou_thr": 1.0}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"fusion": {"source_weights": [0]}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"top_k": -1})"), ValidationError);
}

TEST_CASE("the defaults marker accepts only the standard profile") {
  CHECK_NOTHROW(parse(R"({"defaults": "standard"})"));
  CHECK_THROWS_AS(parse(R"({"defaults": "fast"})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"defaults": 1})"), ValidationError);
}

TEST_CASE("scenario files parse actors, occlusions, and corruption") {
  const ScenarioFile file = parse_scenario(R"({
    "seed": 11,
    "num_frames": 40,
    "extent_w": 800,
    "extent_h": 600,
    "video_id": 3,
    "det_conf": 0.8,
    "actors": [
      {"identity": 1, "label": 2, "start_cx": 100, "start_cy": 100,
       "vx": 2, "vy": 0, "width": 40, "height": 50},
      {"identity": 2, "label": 1, "start_cx": 300, "start_cy": 200,
       "vx": 0, "vy": 1, "width": 80, "height": 60}
    ],
    "occlusions": [{"identity": 1, "first_frame": 5, "last_frame": 8}],
    "corruption": {"flip_rate": 0.5, "flip_mode": "one_per_track",
                   "seed": 9, "flip_targets": [5, 6]}
  })", "scn");

  CHECK(file.scenario.seed == 11);
  CHECK(file.scenario.num_frames == 40);
  CHECK(file.scenario.extent_w == 800.0);
  CHECK(file.scenario.video_id == 3);
  REQUIRE(file.scenario.actors.size() == 2);
  CHECK(file.scenario.actors[0].vx == 2.0);
  CHECK(file.scenario.actors[1].label == 1);
  REQUIRE(file.scenario.occlusions.size() == 1);
  CHECK(file.scenario.occlusions[0].last_frame == 8);
  REQUIRE(file.has_corruption);
  CHECK(file.corruption.flip_rate == 0.5);
  CHECK(file.corruption.flip_mode == FlipMode::one_per_track);
  CHECK(file.corruption.flip_targets == std::vector<int>{5, 6});
}

TEST_CASE("scenario files reject typos and bad modes") {
  CHECK_THROWS_AS(parse_scenario(R"({"frames": 5})", "scn"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(R"({"actors": [{"speed": 3}]})", "scn"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_scenario(R"({"corruption": {"flip_mode": "always"}})", "scn"),
      ValidationError);
  const ScenarioFile plain = parse_scenario(R"({"num_frames": 5})", "scn");
  CHECK_FALSE(plain.has_corruption);
}

TEST_CASE("missing config files raise an io error") {
  CHECK_THROWS_AS(load_pipeline_config("/nonexistent/cfg.json"), IoError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scn.json"), IoError);
}
