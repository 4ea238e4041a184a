#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace detrefine {

// Raised when inputs violate a documented contract (bad file field,
// non-monotonic frame order, invalid configuration).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Nine-category schema. Id 1 is the motorbike itself; 2..9 are the people
// on it (driver and passengers P0/P1/P2, with and without helmet).
namespace classes {

inline constexpr int kMin = 1;
inline constexpr int kMax = 9;
inline constexpr int kMotorbike = 1;

inline bool valid(int id) { return id >= kMin && id <= kMax; }
inline bool is_motor(int id) { return id == kMotorbike; }
inline bool is_human(int id) { return id >= 2 && id <= kMax; }

// Motorbike and driver classes are never relabeled or removed.
inline bool is_protected(int id) { return id >= 1 && id <= 3; }

const char* name(int id);

}  // namespace classes

// Axis-aligned pixel rectangle, stored as (left, top, width, height) to
// match the detection file format.
struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double center_x() const { return left + width / 2.0; }
  double center_y() const { return top + height / 2.0; }
  double area() const { return width * height; }
  bool valid() const;
};

// Intersection area over union area. 0 for disjoint boxes, 1 for identical.
double iou(const BoundingBox& a, const BoundingBox& b);

// Multiplies width and height by `factor`, keeping the box center fixed.
BoundingBox scale_box(const BoundingBox& b, double factor);

enum class Origin { detector, relabeled, virtual_box };

struct Detection {
  int frame = 0;
  BoundingBox box;
  int label = 0;
  double confidence = 0.0;
  Origin origin = Origin::detector;
};

// All detections of one video, keyed by frame index.
struct FrameSet {
  int video_id = 0;
  std::map<int, std::vector<Detection>> frames;

  void add(const Detection& d) { frames[d.frame].push_back(d); }
  std::size_t total_detections() const;
  // true when every stored detection's frame field equals its map key
  bool consistent() const;
};

}  // namespace detrefine
