#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vpslam {

/// Pinhole intrinsics. Pixel coordinates follow the usual convention:
/// u = fx * x / z + cx, v = fy * y / z + cy.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d matrix() const;
  Eigen::Matrix3d inverse_matrix() const;

  /// Throws kInvalidArgument unless fx, fy > 0 and all values are finite.
  void validate() const;
  /// As validate(), and additionally requires the principal point to lie
  /// inside a width x height image.
  void validate(int width, int height) const;

  /// Unit-plane coordinates of a pixel.
  Eigen::Vector2d normalize(const Eigen::Vector2d& pixel) const;
};

struct ImageSize {
  int width = 640;
  int height = 480;

  bool contains(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < width && px.y() < height;
  }
};

/// An image segment together with its homogeneous line and the normal of the
/// great circle it traces on the Gaussian sphere.
struct LineObservation {
  Eigen::Vector2d sp = Eigen::Vector2d::Zero();
  Eigen::Vector2d ep = Eigen::Vector2d::Zero();
  Eigen::Vector3d l = Eigen::Vector3d::UnitY();
  Eigen::Vector3d s = Eigen::Vector3d::UnitY();
  double length = 0.0;
};

/// Element of SO(3). Instances are always orthonormal with det +1; the only
/// way to build one from an arbitrary matrix is `from_matrix`, which checks.
class Rotation {
 public:
  Rotation() = default;

  static Rotation from_matrix(const Eigen::Matrix3d& m, double tolerance = 1e-9);
  static Rotation from_quaternion(const Eigen::Quaterniond& q);
  static Rotation exp(const Eigen::Vector3d& omega);

  Eigen::Vector3d log() const;
  Eigen::Quaterniond quaternion() const;
  const Eigen::Matrix3d& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }

  /// Product re-projected onto SO(3) so long chains of compositions do not
  /// accumulate round-off.
  Rotation operator*(const Rotation& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }

 private:
  explicit Rotation(const Eigen::Matrix3d& m) : m_(m) {}

  Eigen::Matrix3d m_ = Eigen::Matrix3d::Identity();
};

/// World-to-camera pose: X_cam = rotation * X_world + translation.
struct Pose {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double timestamp = 0.0;

  Eigen::Vector3d transform(const Eigen::Vector3d& x_world) const {
    return rotation * x_world + translation;
  }
  /// Optical center in world coordinates, -R^T t.
  Eigen::Vector3d camera_center() const;
  Pose inverse() const;
  Pose operator*(const Pose& other) const;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rodrigues map. exp(0) = I.
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega);

/// Inverse of exp_so3 on angles in [0, pi]. At exactly pi the axis is chosen
/// so that its largest-magnitude component is positive.
Eigen::Vector3d log_so3(const Eigen::Matrix3d& rotation);

/// Geodesic distance on SO(3), in radians.
double angular_distance(const Rotation& a, const Rotation& b);

/// Angle between two unit vectors, stable near 0 and pi.
double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Flips v so that its first component with magnitude above 1e-12 is positive.
Eigen::Vector3d canonical_sign(const Eigen::Vector3d& v);

/// Flips v into the z >= 0 hemisphere. When |z| < 1e-12 the tie is broken
/// by y >= 0, then x >= 0.
Eigen::Vector3d canonical_hemisphere(const Eigen::Vector3d& v);

/// Unit homogeneous line through two pixels (sign-canonical).
/// Throws kDegenerateSegment when the endpoints are closer than 1e-9 px.
Eigen::Vector3d line_coefficients(const Eigen::Vector2d& sp, const Eigen::Vector2d& ep);

/// s = K^T l / |K^T l|, sign-canonical.
Eigen::Vector3d great_circle_normal(const Eigen::Vector3d& l, const CameraIntrinsics& K);

LineObservation make_line_observation(const Eigen::Vector2d& sp, const Eigen::Vector2d& ep,
                                      const CameraIntrinsics& K);

/// Pinhole projection. Throws kBehindCamera when the camera-frame depth is
/// at most 1e-9 m.
Eigen::Vector2d project(const Eigen::Vector3d& x_world, const Pose& pose, const CameraIntrinsics& K);

}  // namespace vpslam
