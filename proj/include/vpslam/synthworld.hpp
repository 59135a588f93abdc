#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "vpslam/geometry.hpp"
#include "vpslam/observation.hpp"

namespace vpslam::synth {

struct Box {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  Eigen::Vector3d center() const { return 0.5 * (min + max); }
};

struct Segment3d {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
  int axis = 0;  // 0, 1, 2 for x, y, z
};

struct SyntheticScene {
  std::vector<Segment3d> segments;
  std::vector<Eigen::Vector3d> points;
  Box extents;
};

using vpslam::ImageSize;

using vpslam::FrameObservation;
using vpslam::FrameTruth;

enum class TrajectoryStyle { kOrbit, kCorridor };

inline constexpr double kFrameRate = 30.0;

CameraIntrinsics default_intrinsics();

/// Scene volume each trajectory style is designed to look at.
Box default_extents(TrajectoryStyle style);

/// Axis-aligned segments (n per axis, lengths U[0.5, 2] m, centers uniform
/// in the box) and points uniform in the box.
SyntheticScene generate_scene(std::uint64_t seed, int n_segments_per_axis, int n_points,
                              const Box& extents);

struct RenderOptions {
  ImageSize image;
  double pixel_noise_sigma = 0.0;
  double outlier_fraction = 0.0;
};

/// Projects the scene into one camera. Segments and points with an endpoint
/// behind the camera or outside the image are dropped; Gaussian noise is
/// added to the surviving pixels, and a fraction of the point observations
/// is replaced with uniform random pixels.
/// Throws kEmptyView when nothing survives.
FrameObservation render_frame(const SyntheticScene& scene, const Pose& gt_pose,
                              const CameraIntrinsics& K, const RenderOptions& options,
                              std::uint64_t seed, int frame_index = 0);

/// Smooth world-to-camera poses at 30 Hz around the default extents.
/// orbit: circle around the scene center; corridor: forward walk with a
/// sinusoidal yaw of +-10 deg plus a small lateral sway.
std::vector<Pose> generate_trajectory(std::uint64_t seed, int n_frames, TrajectoryStyle style);

struct SequenceConfig {
  std::uint64_t seed = 0;
  int n_frames = 200;
  TrajectoryStyle style = TrajectoryStyle::kCorridor;
  double pixel_noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  int segments_per_axis = 30;
  int n_points = 150;
  CameraIntrinsics K = default_intrinsics();
  ImageSize image;
  /// Scene volume; default_extents(style) when unset.
  std::optional<Box> extents;
};

/// A rendered sequence re-expressed in the first camera frame: gt pose 0 is
/// the identity and point coordinates are given in that frame.
struct SyntheticSequence {
  CameraIntrinsics K;
  ImageSize image;
  SyntheticScene scene;
  std::vector<Pose> ground_truth;
  std::vector<FrameObservation> frames;
};

SyntheticSequence make_sequence(const SequenceConfig& config);

/// Seed for a sub-stream, a pure function of (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace vpslam::synth
