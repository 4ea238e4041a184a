#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "detrefine/detfile.hpp"
#include "helpers.hpp"

using namespace detrefine;
using detrefine::testing::det;

namespace {

std::vector<FrameSet> parse(const std::string& text, bool strict = false,
                            std::vector<std::string>* rejects = nullptr) {
  std::istringstream in(text);
  return parse_detections(in, "src", strict, rejects);
}

std::string rewrite(const std::vector<FrameSet>& videos) {
  std::ostringstream out;
  write_detections(out, videos);
  return out.str();
}

}  // namespace

TEST_CASE("a well-formed detection row parses field by field") {
  const std::vector<FrameSet> videos = parse("7,42,100,200,50,80,2,0.95\n");
  REQUIRE(videos.size() == 1);
  CHECK(videos[0].video_id == 7);
  REQUIRE(videos[0].frames.count(42) == 1);
  const Detection& d = videos[0].frames.at(42)[0];
  CHECK(d.box.left == 100.0);
  CHECK(d.box.top == 200.0);
  CHECK(d.box.width == 50.0);
  CHECK(d.box.height == 80.0);
  CHECK(d.label == 2);
  CHECK(d.confidence == 0.95);
  CHECK(d.origin == Origin::detector);
}

TEST_CASE("videos come back sorted and rows group by frame") {
  const std::vector<FrameSet> videos = parse(
      "2,1,0,0,10,10,2,0.5\n"
      "1,3,0,0,10,10,2,0.5\n"
      "1,1,0,0,10,10,2,0.5\n"
      "1,1,20,0,10,10,3,0.4\n");
  REQUIRE(videos.size() == 2);
  CHECK(videos[0].video_id == 1);
  CHECK(videos[1].video_id == 2);
  CHECK(videos[0].frames.at(1).size() == 2);
  CHECK(videos[0].frames.at(3).size() == 1);
}

TEST_CASE("whitespace and blank lines are tolerated") {
  const std::vector<FrameSet> videos = parse(
      "\n"
      " 1 , 2 , 0 , 0 , 10 , 10 , 3 , 0.5 \r\n"
      "\n");
  REQUIRE(videos.size() == 1);
  CHECK(videos[0].frames.at(2)[0].label == 3);
}

TEST_CASE("malformed rows are skipped and reported in lenient mode") {
  const std::string text =
      "1,1,0,0,10,10,2,0.5\n"
      "1,2,3\n"                      // wrong column count
      "x,1,0,0,10,10,2,0.5\n"        // non-numeric video
      "1,1,0,0,0,10,2,0.5\n"         // zero width
      "1,1,0,0,10,10,0,0.5\n"        // class below range
      "1,1,0,0,10,10,10,0.5\n"       // class above range
      "1,1,0,0,10,10,2,1.5\n"        // confidence above one
      "1,-4,0,0,10,10,2,0.5\n"       // negative frame
      "1,9,0,0,10,10,2,0.5\n";       // good again
  std::vector<std::string> rejects;
  const std::vector<FrameSet> videos = parse(text, false, &rejects);
  REQUIRE(videos.size() == 1);
  CHECK(videos[0].total_detections() == 2);
  REQUIRE(rejects.size() == 7);
  CHECK(rejects[0].rfind("src:2:", 0) == 0);
  CHECK(rejects[0].find("expected 8 fields") != std::string::npos);
  CHECK(rejects[1].find("bad video id") != std::string::npos);
  CHECK(rejects[2].find("positive width and height") != std::string::npos);
  CHECK(rejects[3].find("outside 1..9") != std::string::npos);
  CHECK(rejects[5].find("confidence outside") != std::string::npos);
  CHECK(rejects[6].find("negative frame") != std::string::npos);
}

TEST_CASE("strict mode raises on the first bad row") {
  const std::string text =
      "1,1,0,0,10,10,2,0.5\n"
      "broken\n";
  CHECK_THROWS_WITH_AS(parse(text, true), doctest::Contains("src:2:"),
                       ValidationError);
}

TEST_CASE("ground truth rows carry seven columns") {
  std::istringstream in(
      "1,1,0,0,10,10,2\n"
      "1,2,5,5,20,20,3\n");
  const std::vector<GroundTruth> gts = parse_ground_truth(in, "gt");
  REQUIRE(gts.size() == 2);
  CHECK(gts[0].label == 2);
  CHECK(gts[1].box.width == 20.0);

  std::istringstream wrong("1,1,0,0,10,10,2,0.5\n");
  CHECK_THROWS_AS(parse_ground_truth(wrong, "gt", true), ValidationError);
}

TEST_CASE("missing files raise an io error") {
  CHECK_THROWS_AS(load_detections("/nonexistent/path.csv"), IoError);
  CHECK_THROWS_AS(load_ground_truth("/nonexistent/path.csv"), IoError);
}

TEST_CASE("formatted doubles parse back exactly") {
  for (double v : {0.5, 0.1, 1e-5, 0.95, 1.0 / 3.0, 123.456, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(100.0) == "100");
}

TEST_CASE("writing then parsing is lossless") {
  FrameSet a;
  a.video_id = 3;
  a.add(det(1, 10.5, 20.25, 30, 40, 2, 0.875));
  a.add(det(1, 100, 20, 30, 40, 5, 1.0 / 3.0));
  a.add(det(7, 0.1, 0.2, 0.3, 0.4, 9, 1e-5));
  FrameSet b;
  b.video_id = 1;
  b.add(det(2, 5, 5, 5, 5, 1, 0.25));

  const std::string first = rewrite({a, b});
  const std::vector<FrameSet> parsed = parse(first);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].video_id == 1);
  CHECK(rewrite(parsed) == first);

  // Values survive exactly, not approximately.
  CHECK(parsed[1].frames.at(7)[0].confidence == 1e-5);
  CHECK(parsed[1].frames.at(1)[1].confidence == 1.0 / 3.0);
}

TEST_CASE("ground truth writing round-trips and sorts") {
  std::vector<GroundTruth> gts;
  gts.push_back(GroundTruth{2, 1, BoundingBox{0, 0, 10, 10}, 2});
  gts.push_back(GroundTruth{1, 5, BoundingBox{1, 1, 10, 10}, 3});
  gts.push_back(GroundTruth{1, 2, BoundingBox{2, 2, 10, 10}, 4});

  std::ostringstream out;
  write_ground_truth(out, gts);
  const std::string text = out.str();
  CHECK(text ==
        "1,2,2,2,10,10,4\n"
        "1,5,1,1,10,10,3\n"
        "2,1,0,0,10,10,2\n");

  std::istringstream in(text);
  const std::vector<GroundTruth> back = parse_ground_truth(in, "gt");
  REQUIRE(back.size() == 3);
  CHECK(back[0].video_id == 1);
  CHECK(back[0].frame == 2);
}

TEST_CASE("correction rows list the video and both labels") {
  Correction c;
  c.frame = 95;
  c.det_index = 4;
  c.track_id = 12;
  c.action = CorrectionAction::relabel;
  c.old_label = 9;
  c.new_label = 1;
  c.old_conf = 0.2;
  c.new_conf = 0.02;

  Correction r;
  r.frame = 4;
  r.track_id = 3;
  r.action = CorrectionAction::remove;
  r.old_label = 5;
  r.old_conf = 0.4;

  std::ostringstream out;
  write_corrections(out, {{1, c}, {2, r}});
  CHECK(out.str() ==
        "1,95,12,relabel,9,1,0.2,0.02\n"
        "2,4,3,remove,5,0,0.4,0\n");
}

TEST_CASE("corruption journal rows name the mutation") {
  CorruptionEvent ev;
  ev.kind = CorruptionKind::flip;
  ev.frame = 10;
  ev.det_index = 2;
  ev.before = det(10, 0, 0, 10, 10, 5, 0.9);
  ev.after = det(10, 0, 0, 10, 10, 7, 0.2);

  CorruptionEvent dr;
  dr.kind = CorruptionKind::drop;
  dr.frame = 11;
  dr.det_index = 0;
  dr.before = det(11, 0, 0, 10, 10, 3, 0.8);
  dr.after = dr.before;

  std::ostringstream out;
  write_corruption_journal(out, {ev, dr});
  CHECK(out.str() ==
        "flip,10,2,5,0.9,7,0.2\n"
        "drop,11,0,3,0.8,3,0.8\n");
}

TEST_CASE("the evaluation report serializes to text and json") {
  EvalReport rep;
  rep.map50 = 0.75;
  rep.per_class_ap[2] = 1.0;
  rep.per_class_ap[3] = 0.5;
  rep.counts[2] = ClassCount{4, 4, 4, 0, 0};
  rep.counts[3] = ClassCount{2, 3, 1, 2, 1};
  rep.classes_absent = {1, 4, 5, 6, 7, 8, 9};
  rep.warnings.push_back("something odd");

  std::ostringstream out;
  write_eval_report(out, rep);
  const std::string text = out.str();
  CHECK(text.find("class 2 (DHelmet): ap50=1") != std::string::npos);
  CHECK(text.find("gt=2 pred=3 tp=1 fp=2 fn=1") != std::string::npos);
  CHECK(text.find("map50=0.75") != std::string::npos);
  CHECK(text.find("absent: 1 4 5 6 7 8 9") != std::string::npos);
  CHECK(text.find("warning: something odd") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(eval_report_json(rep));
  CHECK(j["map50"] == 0.75);
  CHECK(j["per_class_ap"]["3"] == 0.5);
  CHECK(j["counts"]["3"]["fn"] == 1);
  CHECK(j["counts"]["2"]["num_pred"] == 4);
  CHECK(j["classes_absent"].size() == 7);
  CHECK(j["warnings"][0] == "something odd");
}
