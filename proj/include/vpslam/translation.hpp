#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vpslam/geometry.hpp"

namespace vpslam {

struct PointCorrespondence {
  Eigen::Vector3d X = Eigen::Vector3d::Zero();  // world point, meters
  Eigen::Vector2d x = Eigen::Vector2d::Zero();  // observed pixel
};

/// Stacked linear constraints on t for a known rotation. Correspondence i
/// owns rows 2*row_map[k] .. 2*row_map[k]+1, i.e. row pair k.
struct TranslationSystem {
  Eigen::MatrixX3d A;
  Eigen::VectorXd b;
  std::vector<std::size_t> row_map;
};

/// Row pair per correspondence:
///   A = [-1  0  x_n]    b = [(R X)_1 - (R X)_3 x_n]
///       [ 0 -1  y_n]        [(R X)_2 - (R X)_3 y_n]
/// with (x_n, y_n) the normalized image coordinates. At the true t,
/// A t - b equals the reprojection error scaled by the depth.
/// Throws kInsufficientPoints for fewer than two correspondences.
TranslationSystem build_translation_system(std::span<const PointCorrespondence> corrs,
                                           const Rotation& rotation, const CameraIntrinsics& K);

/// Same, restricted to the correspondences whose indices are listed.
TranslationSystem build_translation_system(std::span<const PointCorrespondence> corrs,
                                           std::span<const std::size_t> indices,
                                           const Rotation& rotation, const CameraIntrinsics& K);

/// Solves A^T A t = A^T b. Throws kRankDeficient when A^T A is singular or
/// its condition number reaches 1e12.
Eigen::Vector3d solve_normal_equations(const TranslationSystem& system);

struct RansacConfig {
  int iterations = 200;
  double inlier_threshold_px = 2.0;
  int min_inliers = 4;
  std::uint64_t seed = 0;
};

struct TranslationEstimate {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::vector<bool> inliers;
  int inlier_count = 0;
};

/// Reprojection error in pixels, or +inf when the point is not in front of
/// the camera.
double reprojection_error(const PointCorrespondence& corr, const Pose& pose,
                          const CameraIntrinsics& K);

/// Two-point RANSAC over the linear system followed by a normal-equation
/// solve on the largest consensus set. The sample drawn at iteration i
/// depends only on (seed, i).
/// Throws kInsufficientPoints (< 2) or kNoConsensus (best set < min_inliers).
TranslationEstimate ransac_translation(std::span<const PointCorrespondence> corrs,
                                       const Rotation& rotation, const CameraIntrinsics& K,
                                       const RansacConfig& config = {});

}  // namespace vpslam
