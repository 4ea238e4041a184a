#pragma once

#include <Eigen/Dense>

#include "detrefine/types.hpp"

namespace detrefine {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

// Constant-velocity box filter. State layout:
//   [cx, cy, s, r, vcx, vcy, vs]
// where s is the box area and r the width/height aspect ratio; r carries no
// velocity term.
struct KalmanState {
  Vec7 mean = Vec7::Zero();
  Mat7 covariance = Mat7::Identity();
};

// Initialize from a first measurement. Velocities start at zero with wide
// covariance so early updates dominate.
KalmanState kalman_init(const BoundingBox& box);

// Advance one frame and return the predicted box. Area is kept strictly
// positive: a predicted non-positive area zeroes the area velocity first.
BoundingBox kalman_predict(KalmanState& st);

// Fold one measurement into the state (Joseph-form covariance update).
void kalman_update(KalmanState& st, const BoundingBox& box);

// Current state as a box, without advancing time.
BoundingBox state_box(const KalmanState& st);

}  // namespace detrefine
