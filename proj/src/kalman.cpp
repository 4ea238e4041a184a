#include "detrefine/kalman.hpp"

#include <algorithm>
#include <cmath>

namespace detrefine {
namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat47 = Eigen::Matrix<double, 4, 7>;
using Mat74 = Eigen::Matrix<double, 7, 4>;

Vec4 box_to_z(const BoundingBox& box) {
  Vec4 z;
  z << box.center_x(), box.center_y(), box.area(), box.width / box.height;
  return z;
}

BoundingBox z_to_box(double cx, double cy, double s, double r) {
  s = std::max(s, 1e-6);
  r = std::max(r, 1e-6);
  const double w = std::sqrt(s * r);
  const double h = std::sqrt(s / r);
  return BoundingBox{cx - w / 2.0, cy - h / 2.0, w, h};
}

Mat7 transition() {
  Mat7 f = Mat7::Identity();
  f(0, 4) = 1.0;
  f(1, 5) = 1.0;
  f(2, 6) = 1.0;
  return f;
}

Mat47 measurement() {
  Mat47 h = Mat47::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(2, 2) = 1.0;
  h(3, 3) = 1.0;
  return h;
}

// Noise scales follow the usual pedestrian-tracking convention of tying
// position noise to object size: size/20 for positions, size/160 for
// velocities. Area noise uses the area itself on the same divisors.
void noise_terms(const Vec7& mean, double& std_pos, double& std_vel,
                 double& std_area, double& std_varea) {
  const double s = std::max(mean(2), 1e-6);
  const double size = std::sqrt(s);
  std_pos = size / 20.0;
  std_vel = size / 160.0;
  std_area = s / 20.0;
  std_varea = s / 160.0;
}

}  // namespace

KalmanState kalman_init(const BoundingBox& box) {
  KalmanState st;
  const Vec4 z = box_to_z(box);
  st.mean.head<4>() = z;

  double std_pos, std_vel, std_area, std_varea;
  noise_terms(st.mean, std_pos, std_vel, std_area, std_varea);

  Vec7 diag;
  diag << 2.0 * std_pos, 2.0 * std_pos, 2.0 * std_area, 1e-1,
      10.0 * std_vel, 10.0 * std_vel, 10.0 * std_varea;
  st.covariance = diag.cwiseProduct(diag).asDiagonal();
  return st;
}

BoundingBox kalman_predict(KalmanState& st) {
  // A shrinking area must never cross zero; kill the area velocity instead.
  if (st.mean(2) + st.mean(6) <= 0.0) st.mean(6) = 0.0;

  const Mat7 f = transition();

  double std_pos, std_vel, std_area, std_varea;
  noise_terms(st.mean, std_pos, std_vel, std_area, std_varea);
  Vec7 qdiag;
  qdiag << std_pos, std_pos, std_area, 1e-2, std_vel, std_vel, std_varea;
  const Mat7 q = qdiag.cwiseProduct(qdiag).asDiagonal();

  st.mean = f * st.mean;
  st.covariance = f * st.covariance * f.transpose() + q;
  st.covariance = ((st.covariance + st.covariance.transpose()) / 2.0).eval();
  return state_box(st);
}

void kalman_update(KalmanState& st, const BoundingBox& box) {
  const Vec4 z = box_to_z(box);
  const Mat47 h = measurement();

  double std_pos, std_vel, std_area, std_varea;
  noise_terms(st.mean, std_pos, std_vel, std_area, std_varea);
  Vec4 rdiag;
  rdiag << std_pos, std_pos, std_area, 1e-1;
  const Mat4 r = rdiag.cwiseProduct(rdiag).asDiagonal();

  const Vec4 innovation = z - h * st.mean;
  const Mat4 s = h * st.covariance * h.transpose() + r;
  const Mat74 k = st.covariance * h.transpose() * s.inverse();

  st.mean += k * innovation;

  // Joseph form keeps the covariance positive definite through long runs.
  const Mat7 ikh = Mat7::Identity() - k * h;
  st.covariance =
      ikh * st.covariance * ikh.transpose() + k * r * k.transpose();
  st.covariance = ((st.covariance + st.covariance.transpose()) / 2.0).eval();
}

BoundingBox state_box(const KalmanState& st) {
  return z_to_box(st.mean(0), st.mean(1), st.mean(2), st.mean(3));
}

}  // namespace detrefine
