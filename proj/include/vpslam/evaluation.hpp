#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vpslam/geometry.hpp"

namespace vpslam {

/// x -> scale * R x + t
struct Similarity {
  double scale = 1.0;
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return scale * (rotation * x) + translation; }
};

struct AssociatedPositions {
  std::vector<Eigen::Vector3d> est;
  std::vector<Eigen::Vector3d> gt;
  std::vector<double> timestamps;
  std::size_t unmatched = 0;
};

/// Pairs every estimated pose with the unused ground-truth pose nearest in
/// time, if within `max_dt` seconds. Positions are camera centers.
AssociatedPositions associate(const std::vector<Pose>& est, const std::vector<Pose>& gt,
                              double max_dt = 0.02);

/// Closed-form least-squares similarity taking est onto gt.
/// Throws kInsufficientPairs (< 3) or kCollinearDegenerate.
Similarity umeyama_align_7dof(std::span<const Eigen::Vector3d> est,
                              std::span<const Eigen::Vector3d> gt);
Similarity umeyama_align_7dof(const std::vector<Pose>& est, const std::vector<Pose>& gt);

struct AteResult {
  double rmse = 0.0;
  Similarity alignment;
  std::vector<double> timestamps;
  std::vector<double> residuals;
  std::size_t unmatched = 0;
};

AteResult evaluate_ate(std::span<const Eigen::Vector3d> est, std::span<const Eigen::Vector3d> gt);
AteResult evaluate_ate(const std::vector<Pose>& est, const std::vector<Pose>& gt);

/// RMSE of camera-center residuals after 7-DoF alignment, meters.
double ate_rmse(const std::vector<Pose>& est, const std::vector<Pose>& gt);

}  // namespace vpslam
