#include <algorithm>
#include <vector>

#include <doctest.h>

#include "detrefine/fusion.hpp"
#include "detrefine/rng.hpp"
#include "helpers.hpp"

using namespace detrefine;
using detrefine::testing::det;
using detrefine::testing::same_box;

TEST_CASE("a single source with disjoint boxes passes through") {
  const std::vector<Detection> src = {det(1, 0, 0, 10, 10, 2, 0.9),
                                      det(1, 100, 0, 10, 10, 3, 0.4)};
  const std::vector<Detection> out = fuse_frame({src}, FusionConfig{});
  REQUIRE(out.size() == 2);
  CHECK(out[0].confidence == 0.9);
  CHECK(same_box(out[0].box, src[0].box));
  CHECK(out[1].confidence == 0.4);
  CHECK(same_box(out[1].box, src[1].box));
}

TEST_CASE("two sources agreeing on a box average their confidence") {
  const std::vector<Detection> a = {det(1, 50, 50, 40, 40, 2, 0.6)};
  const std::vector<Detection> b = {det(1, 50, 50, 40, 40, 2, 0.8)};
  const std::vector<Detection> out = fuse_frame({a, b}, FusionConfig{});
  REQUIRE(out.size() == 1);
  CHECK(out[0].confidence == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(same_box(out[0].box, a[0].box));
  CHECK(out[0].label == 2);
}

TEST_CASE("cluster coordinates are confidence-weighted means") {
  // iou of the two boxes is 80/120, comfortably above the 0.55 gate.
  const std::vector<Detection> a = {det(1, 0, 0, 10, 10, 2, 0.8)};
  const std::vector<Detection> b = {det(1, 2, 0, 10, 10, 2, 0.4)};
  const std::vector<Detection> out = fuse_frame({a, b}, FusionConfig{});
  REQUIRE(out.size() == 1);
  CHECK(out[0].box.left == doctest::Approx(0.8 / 1.2).epsilon(1e-12));
  CHECK(out[0].box.top == 0.0);
  CHECK(out[0].box.width == doctest::Approx(10.0));
  CHECK(out[0].confidence == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("a box only one of two sources saw is penalized") {
  const std::vector<Detection> a = {det(1, 0, 0, 10, 10, 2, 0.8)};
  const std::vector<Detection> b = {det(1, 500, 0, 10, 10, 2, 0.6)};
  const std::vector<Detection> out = fuse_frame({a, b}, FusionConfig{});
  REQUIRE(out.size() == 2);
  // min(1, 1/2) halves each singleton cluster; output is confidence-sorted.
  CHECK(out[0].confidence == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(out[1].confidence == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("same box different class never merges") {
  const std::vector<Detection> a = {det(1, 0, 0, 10, 10, 2, 0.8)};
  const std::vector<Detection> b = {det(1, 0, 0, 10, 10, 3, 0.6)};
  CHECK(fuse_frame({a, b}, FusionConfig{}).size() == 2);
}

TEST_CASE("source weights scale both coordinates and confidence") {
  FusionConfig cfg;
  cfg.source_weights = {2.0, 1.0};
  const std::vector<Detection> a = {det(1, 0, 0, 10, 10, 2, 0.5)};
  const std::vector<Detection> b = {det(1, 2, 0, 10, 10, 2, 0.5)};
  const std::vector<Detection> out = fuse_frame({a, b}, cfg);
  REQUIRE(out.size() == 1);
  // Effective confidences 1.0 and 0.5; mean 0.75, both sources present.
  CHECK(out[0].confidence == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(out[0].box.left == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("a weight list of the wrong length is rejected") {
  FusionConfig cfg;
  cfg.source_weights = {1.0};
  const std::vector<Detection> a = {det(1, 0, 0, 10, 10, 2, 0.5)};
  CHECK_THROWS_AS(fuse_frame({a, a}, cfg), ValidationError);
}

TEST_CASE("the skip threshold drops boxes before clustering") {
  FusionConfig cfg;
  cfg.skip_box_thr = 0.5;
  const std::vector<Detection> a = {det(1, 0, 0, 10, 10, 2, 0.8),
                                    det(1, 100, 0, 10, 10, 2, 0.3)};
  const std::vector<Detection> out = fuse_frame({a}, cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].confidence == 0.8);
}

TEST_CASE("fused output is sorted by descending confidence") {
  const std::vector<Detection> a = {det(1, 0, 0, 10, 10, 2, 0.2),
                                    det(1, 100, 0, 10, 10, 3, 0.9),
                                    det(1, 200, 0, 10, 10, 4, 0.5)};
  const std::vector<Detection> out = fuse_frame({a}, FusionConfig{});
  REQUIRE(out.size() == 3);
  CHECK(std::is_sorted(out.begin(), out.end(),
                       [](const Detection& x, const Detection& y) {
                         return x.confidence > y.confidence;
                       }));
}

TEST_CASE("swapping the sources changes nothing") {
  Rng rng(411);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Detection> a;
    std::vector<Detection> b;
    for (int i = 0; i < 6; ++i) {
      const double x = rng.uniform(0.0, 200.0);
      const double y = rng.uniform(0.0, 200.0);
      const int label = static_cast<int>(rng.uniform_int(1, 4));
      a.push_back(det(1, x, y, 30, 30, label, rng.uniform(0.05, 1.0)));
      b.push_back(det(1, x + rng.uniform(-5.0, 5.0), y, 30, 30, label,
                      rng.uniform(0.05, 1.0)));
    }
    const std::vector<Detection> fwd = fuse_frame({a, b}, FusionConfig{});
    const std::vector<Detection> rev = fuse_frame({b, a}, FusionConfig{});
    REQUIRE(fwd.size() == rev.size());
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      CHECK(detrefine::testing::same_detection(fwd[i], rev[i]));
    }
  }
}

TEST_CASE("video fusion unions frames and checks identity") {
  FrameSet a;
  a.video_id = 9;
  a.add(det(1, 0, 0, 10, 10, 2, 0.8));
  a.add(det(3, 0, 0, 10, 10, 2, 0.8));
  FrameSet b;
  b.video_id = 9;
  b.add(det(3, 0, 0, 10, 10, 2, 0.6));

  const FrameSet fused = fuse_video({a, b}, FusionConfig{});
  CHECK(fused.video_id == 9);
  REQUIRE(fused.frames.size() == 2);
  // Frame 1 exists in one source only: confidence halves.
  CHECK(fused.frames.at(1)[0].confidence == doctest::Approx(0.4));
  CHECK(fused.frames.at(1)[0].frame == 1);
  // Frame 3 merges across both.
  CHECK(fused.frames.at(3)[0].confidence == doctest::Approx(0.7));

  FrameSet c;
  c.video_id = 10;
  CHECK_THROWS_AS(fuse_video({a, c}, FusionConfig{}), ValidationError);

  CHECK(fuse_video({}, FusionConfig{}).frames.empty());
}
