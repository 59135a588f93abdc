#include "vpslam/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "vpslam/error.hpp"

namespace vpslam::synth {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Eigen::Matrix3d rot_x(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d rot_y(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
Eigen::Matrix3d rot_z(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

/// World-to-camera pose from a camera orientation (columns: right, down,
/// forward in world coordinates) and optical center.
Pose pose_from_camera(const Eigen::Matrix3d& r_wc, const Eigen::Vector3d& center, double stamp) {
  const Rotation r_cw = Rotation::from_matrix(r_wc.transpose(), 1e-9);
  return {r_cw, -(r_cw * center), stamp};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CameraIntrinsics default_intrinsics() { return {500.0, 500.0, 320.0, 240.0}; }

Box default_extents(TrajectoryStyle style) {
  switch (style) {
    case TrajectoryStyle::kOrbit:
      return {Eigen::Vector3d(-1.5, -1.5, -1.5), Eigen::Vector3d(1.5, 1.5, 1.5)};
    case TrajectoryStyle::kCorridor:
      return {Eigen::Vector3d(-2.0, -1.5, 5.0), Eigen::Vector3d(2.0, 1.5, 14.0)};
  }
  return {};
}

SyntheticScene generate_scene(std::uint64_t seed, int n_segments_per_axis, int n_points,
                              const Box& extents) {
  if (n_segments_per_axis < 1 || n_points < 1) {
    throw Error(ErrorCode::kInvalidArgument, "scene counts must be at least 1");
  }
  std::mt19937_64 rng(seed);
  auto sample_point = [&] {
    return Eigen::Vector3d(uniform(rng, extents.min.x(), extents.max.x()),
                           uniform(rng, extents.min.y(), extents.max.y()),
                           uniform(rng, extents.min.z(), extents.max.z()));
  };

  SyntheticScene scene;
  scene.extents = extents;
  for (int axis = 0; axis < 3; ++axis) {
    for (int i = 0; i < n_segments_per_axis; ++i) {
      const Eigen::Vector3d center = sample_point();
      const double half = 0.5 * uniform(rng, 0.5, 2.0);
      const Eigen::Vector3d dir = Eigen::Vector3d::Unit(axis);
      scene.segments.push_back({center - half * dir, center + half * dir, axis});
    }
  }
  scene.points.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) scene.points.push_back(sample_point());
  return scene;
}

FrameObservation render_frame(const SyntheticScene& scene, const Pose& gt_pose,
                              const CameraIntrinsics& K, const RenderOptions& options,
                              std::uint64_t seed, int frame_index) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = options.pixel_noise_sigma;
  auto perturb = [&](const Eigen::Vector2d& px) {
    if (sigma <= 0.0) return px;
    const double du = sigma * noise(rng);
    const double dv = sigma * noise(rng);
    return Eigen::Vector2d(px.x() + du, px.y() + dv);
  };
  auto visible = [&](const Eigen::Vector3d& x, Eigen::Vector2d& px) {
    if (!(gt_pose.transform(x).z() > 1e-9)) return false;
    px = project(x, gt_pose, K);
    return options.image.contains(px);
  };

  FrameObservation obs;
  obs.frame_index = frame_index;
  obs.timestamp = gt_pose.timestamp;
  FrameTruth truth;
  truth.pose = gt_pose;

  for (const Segment3d& seg : scene.segments) {
    Eigen::Vector2d pa;
    Eigen::Vector2d pb;
    if (!visible(seg.a, pa) || !visible(seg.b, pb)) continue;
    const Eigen::Vector2d na = perturb(pa);
    const Eigen::Vector2d nb = perturb(pb);
    if ((nb - na).norm() < 1e-6) continue;
    obs.lines.push_back(make_line_observation(na, nb, K));
    truth.line_axis.push_back(seg.axis);
  }

  for (const Eigen::Vector3d& x : scene.points) {
    Eigen::Vector2d px;
    if (!visible(x, px)) continue;
    obs.points.push_back({x, perturb(px)});
  }
  truth.point_is_outlier.assign(obs.points.size(), false);

  if (obs.lines.empty() && obs.points.empty()) {
    throw Error(ErrorCode::kEmptyView, "nothing of the scene is visible from this pose");
  }

  const auto n_outliers = static_cast<std::size_t>(
      std::lround(std::clamp(options.outlier_fraction, 0.0, 1.0) * static_cast<double>(obs.points.size())));
  if (n_outliers > 0) {
    std::vector<std::size_t> order(obs.points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < n_outliers; ++k) {
      const std::size_t i = order[k];
      obs.points[i].x = {uniform(rng, 0.0, options.image.width), uniform(rng, 0.0, options.image.height)};
      truth.point_is_outlier[i] = true;
    }
  }

  obs.truth = std::move(truth);
  return obs;
}

std::vector<Pose> generate_trajectory(std::uint64_t seed, int n_frames, TrajectoryStyle style) {
  if (n_frames < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a trajectory needs at least two frames");
  }
  std::mt19937_64 rng(seed);
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(n_frames));

  if (style == TrajectoryStyle::kOrbit) {
    const double start = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double radius = 6.0;
    const double height = 2.0;
    const double rate = 0.6 * kDeg;
    const Eigen::Vector3d target = default_extents(style).center();
    const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
    for (int i = 0; i < n_frames; ++i) {
      const double a = start + rate * i;
      const Eigen::Vector3d c(radius * std::cos(a), radius * std::sin(a), height);
      const Eigen::Vector3d forward = (target - c).normalized();
      const Eigen::Vector3d right = forward.cross(up).normalized();
      const Eigen::Vector3d down = forward.cross(right);
      Eigen::Matrix3d r_wc;
      r_wc << right, down, forward;
      poses.push_back(pose_from_camera(r_wc, c, i / kFrameRate));
    }
    return poses;
  }

  const double yaw_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double sway_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double bob_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double speed = 0.015;  // m per frame
  for (int i = 0; i < n_frames; ++i) {
    const double yaw = 12.0 * kDeg + 10.0 * kDeg * std::sin(2.0 * std::numbers::pi * i / 120.0 + yaw_phase);
    const Eigen::Vector3d c(0.15 * std::sin(2.0 * std::numbers::pi * i / 90.0 + sway_phase),
                            0.05 * std::sin(2.0 * std::numbers::pi * i / 60.0 + bob_phase),
                            speed * i);
    const Eigen::Matrix3d r_wc = rot_y(yaw) * rot_x(7.7 * kDeg) * rot_z(3.0 * kDeg);
    poses.push_back(pose_from_camera(r_wc, c, i / kFrameRate));
  }
  return poses;
}

SyntheticSequence make_sequence(const SequenceConfig& config) {
  SyntheticSequence seq;
  seq.K = config.K;
  seq.image = config.image;
  seq.scene = generate_scene(derive_seed(config.seed, 1), config.segments_per_axis, config.n_points,
                             config.extents.value_or(default_extents(config.style)));
  const std::vector<Pose> world_poses =
      generate_trajectory(derive_seed(config.seed, 2), config.n_frames, config.style);

  const Pose anchor_inv = world_poses.front().inverse();
  const RenderOptions options{config.image, config.pixel_noise_sigma, config.outlier_fraction};
  for (int i = 0; i < config.n_frames; ++i) {
    const Pose& world_pose = world_poses[static_cast<std::size_t>(i)];
    FrameObservation obs = render_frame(seq.scene, world_pose, config.K, options,
                                        derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(i)), i);
    // Re-express in the first camera frame: X' = T0 X, T_i' = T_i T0^-1.
    for (PointCorrespondence& pc : obs.points) pc.X = world_poses.front().transform(pc.X);
    Pose rebased = world_pose * anchor_inv;
    rebased.timestamp = world_pose.timestamp;
    obs.truth->pose = rebased;
    seq.ground_truth.push_back(rebased);
    seq.frames.push_back(std::move(obs));
  }
  return seq;
}

}  // namespace vpslam::synth
