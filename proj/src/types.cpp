#include "detrefine/types.hpp"

#include <algorithm>
#include <cmath>

namespace detrefine {

namespace classes {

const char* name(int id) {
  switch (id) {
    case 1: return "motorbike";
    case 2: return "DHelmet";
    case 3: return "DNoHelmet";
    case 4: return "P1Helmet";
    case 5: return "P1NoHelmet";
    case 6: return "P2Helmet";
    case 7: return "P2NoHelmet";
    case 8: return "P0Helmet";
    case 9: return "P0NoHelmet";
    default: return "unknown";
  }
}

}  // namespace classes

bool BoundingBox::valid() const {
  return std::isfinite(left) && std::isfinite(top) && std::isfinite(width) &&
         std::isfinite(height) && width > 0.0 && height > 0.0;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix1 = std::max(a.left, b.left);
  const double iy1 = std::max(a.top, b.top);
  const double ix2 = std::min(a.right(), b.right());
  const double iy2 = std::min(a.bottom(), b.bottom());
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

BoundingBox scale_box(const BoundingBox& b, double factor) {
  const double nw = b.width * factor;
  const double nh = b.height * factor;
  return BoundingBox{b.center_x() - nw / 2.0, b.center_y() - nh / 2.0, nw, nh};
}

std::size_t FrameSet::total_detections() const {
  std::size_t n = 0;
  for (const auto& [frame, dets] : frames) n += dets.size();
  return n;
}

bool FrameSet::consistent() const {
  for (const auto& [frame, dets] : frames) {
    for (const auto& d : dets) {
      if (d.frame != frame) return false;
    }
  }
  return true;
}

}  // namespace detrefine
