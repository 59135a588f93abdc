#include "vpslam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vpslam/error.hpp"

namespace vpslam {

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraIntrinsics::inverse_matrix() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx,
       0.0, 1.0 / fy, -cy / fy,
       0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(ErrorCode::kInvalidArgument, "intrinsics must be finite");
  }
  if (fx <= 0.0 || fy <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
}

void CameraIntrinsics::validate(int width, int height) const {
  validate();
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw Error(ErrorCode::kInvalidArgument, "principal point outside the image");
  }
}

Eigen::Vector2d CameraIntrinsics::normalize(const Eigen::Vector2d& pixel) const {
  return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy};
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m, double tolerance) {
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (!m.allFinite() || ortho > tolerance || std::abs(det - 1.0) > tolerance) {
    std::ostringstream msg;
    msg << "matrix is not a rotation (|R^T R - I| = " << ortho << ", det = " << det << ")";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  return Rotation(m);
}

Rotation Rotation::from_quaternion(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kInvalidArgument, "quaternion has zero or non-finite norm");
  }
  return Rotation(Eigen::Quaterniond(q.coeffs() / n).toRotationMatrix());
}

Rotation Rotation::operator*(const Rotation& other) const {
  Eigen::Quaterniond q(m_ * other.m_);
  q.normalize();
  return Rotation(q.toRotationMatrix());
}

Rotation Rotation::exp(const Eigen::Vector3d& omega) { return Rotation(exp_so3(omega)); }

Eigen::Vector3d Rotation::log() const { return log_so3(m_); }

Eigen::Quaterniond Rotation::quaternion() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  // Fixed hemisphere so that written trajectories are reproducible.
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Eigen::Vector3d Pose::camera_center() const { return -(rotation.inverse() * translation); }

Pose Pose::inverse() const {
  const Rotation r_inv = rotation.inverse();
  return {r_inv, -(r_inv * translation), timestamp};
}

Pose Pose::operator*(const Pose& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation, timestamp};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  if (theta < 1e-8) {
    return Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& r) {
  // w = 2 sin(theta) * axis
  const Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * w.norm();
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);

  if (c >= 0.0 || s > 1e-4) {
    if (s < 1e-12) return 0.5 * w;
    return (0.5 * theta / s) * w;
  }

  // Near pi the antisymmetric part vanishes; recover the axis from the
  // symmetric part (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) a a^T.
  const Eigen::Matrix3d b =
      0.5 * (r + r.transpose()) - c * Eigen::Matrix3d::Identity();
  Eigen::Index j = 0;
  b.diagonal().maxCoeff(&j);
  Eigen::Vector3d axis = b.col(j).normalized();
  if (w.norm() > 1e-14) {
    if (axis.dot(w) < 0.0) axis = -axis;
  } else {
    Eigen::Index k = 0;
    axis.cwiseAbs().maxCoeff(&k);
    if (axis(k) < 0.0) axis = -axis;
  }
  return theta * axis;
}

double angular_distance(const Rotation& a, const Rotation& b) {
  return (a.inverse() * b).log().norm();
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Eigen::Vector3d canonical_sign(const Eigen::Vector3d& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v(i)) > 1e-12) return v(i) < 0.0 ? Eigen::Vector3d(-v) : v;
  }
  return v;
}

Eigen::Vector3d canonical_hemisphere(const Eigen::Vector3d& v) {
  if (std::abs(v.z()) >= 1e-12) return v.z() < 0.0 ? Eigen::Vector3d(-v) : v;
  if (std::abs(v.y()) >= 1e-12) return v.y() < 0.0 ? Eigen::Vector3d(-v) : v;
  return v.x() < 0.0 ? Eigen::Vector3d(-v) : v;
}

Eigen::Vector3d line_coefficients(const Eigen::Vector2d& sp, const Eigen::Vector2d& ep) {
  if ((ep - sp).norm() < 1e-9) {
    throw Error(ErrorCode::kDegenerateSegment, "segment endpoints coincide");
  }
  const Eigen::Vector3d l = sp.homogeneous().cross(ep.homogeneous());
  return canonical_sign(l.normalized());
}

Eigen::Vector3d great_circle_normal(const Eigen::Vector3d& l, const CameraIntrinsics& K) {
  const Eigen::Vector3d s(K.fx * l.x(), K.fy * l.y(), K.cx * l.x() + K.cy * l.y() + l.z());
  return canonical_sign(s.normalized());
}

LineObservation make_line_observation(const Eigen::Vector2d& sp, const Eigen::Vector2d& ep,
                                      const CameraIntrinsics& K) {
  LineObservation obs;
  obs.sp = sp;
  obs.ep = ep;
  obs.l = line_coefficients(sp, ep);
  obs.s = great_circle_normal(obs.l, K);
  obs.length = (ep - sp).norm();
  return obs;
}

Eigen::Vector2d project(const Eigen::Vector3d& x_world, const Pose& pose, const CameraIntrinsics& K) {
  const Eigen::Vector3d xc = pose.transform(x_world);
  if (!(xc.z() > 1e-9)) {
    throw Error(ErrorCode::kBehindCamera, "point is not in front of the camera");
  }
  return {K.fx * xc.x() / xc.z() + K.cx, K.fy * xc.y() / xc.z() + K.cy};
}

}  // namespace vpslam
