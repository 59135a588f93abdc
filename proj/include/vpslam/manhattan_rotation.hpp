#pragma once

#include <array>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vpslam/geometry.hpp"
#include "vpslam/vp_detect.hpp"

namespace vpslam {

/// Reference Manhattan axes expressed in the world frame. The columns of
/// `axes` form a rotation matrix.
struct ManhattanFrame {
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
  int established_at = 0;

  Eigen::Vector3d axis(int k) const { return axes.col(k); }
};

struct DominantDirection {
  Eigen::Vector3d direction;
  /// max_i |s_i . direction| over the cluster.
  double residual = 0.0;
};

/// Least-squares common direction of a cluster of great-circle normals: the
/// right singular vector of the stacked normals with the smallest singular
/// value, hemisphere-canonical.
/// Throws kInsufficientLines (< 2 normals) or kDegenerateCluster when the
/// two smallest singular values are closer than 1e-6.
DominantDirection dominant_direction(std::span<const Eigen::Vector3d> normals);

/// Weighted variant: row i of the stacked system is scaled by weights[i].
/// Throws kInvalidArgument on a size mismatch or a non-positive weight.
DominantDirection dominant_direction(std::span<const Eigen::Vector3d> normals,
                                     std::span<const double> weights);

/// Nearest rotation (Frobenius) to [d1|d2|d3]; the column paired with the
/// smallest singular value is flipped when the determinant comes out -1.
/// Throws kNotFrameLike when any pair has |di . dj| >= 0.2.
ManhattanFrame orthonormalize_frame(const Eigen::Vector3d& d1, const Eigen::Vector3d& d2,
                                    const Eigen::Vector3d& d3, int established_at = 0);

/// Observed vanishing directions after per-cluster refinement.
struct ObservedDirections {
  std::vector<Eigen::Vector3d> directions;
  std::vector<int> line_counts;
};

struct RefinementConfig {
  double tau = 1.5 * std::numbers::pi / 180.0;
  int min_cluster_lines = 5;
  int passes = 2;
  /// Scale each normal by its segment length in the cluster fit; longer
  /// segments have proportionally smaller normal noise.
  bool weight_by_length = true;
};

struct RefinedVanishingPoints {
  /// Refined direction per detected axis, or the grid direction when the
  /// cluster was too small to refine.
  std::array<Eigen::Vector3d, 3> directions;
  std::array<bool, 3> refined{};
  std::array<int, 3> cluster_sizes{};
  std::vector<int> labels;

  int qualified_axes() const;
  /// Refined directions only; when exactly two qualify the third is
  /// completed by their cross product.
  ObservedDirections observed() const;
};

/// Cluster lines against the detected triplet, re-estimate each cluster's
/// direction with `dominant_direction`, and repeat with the refined set.
RefinedVanishingPoints refine_vanishing_points(std::span<const LineObservation> lines,
                                               const VanishingPointSet& vps,
                                               const RefinementConfig& config = {});

/// Matched pairs (delta_k, d_k) for the alignment cost.
struct RotationProblem {
  std::vector<Eigen::Vector3d> deltas;
  std::vector<Eigen::Vector3d> dirs;
  std::vector<int> frame_axis;
  std::vector<double> weights;
  Rotation initial;

  std::size_t size() const { return deltas.size(); }
};

/// Greedy association of observed directions with the frame axes rotated by
/// `initial`. Signs of the deltas are fixed so that delta . (R d) > 0 and
/// pairs weaker than cos(20 deg) are dropped. Output is ordered by frame axis.
/// Throws kNoMatch when nothing survives.
RotationProblem match_vps_to_frame(std::span<const Eigen::Vector3d> deltas,
                                   const ManhattanFrame& frame, const Rotation& initial,
                                   std::span<const double> weights = {});

/// Sum of weighted angles between delta_k and R d_k.
double rotation_cost(const Rotation& rotation, const RotationProblem& problem);
/// Same, with R = exp(omega).
double rotation_cost(const Eigen::Vector3d& omega, const RotationProblem& problem);

/// Per-axis gradients of the angle terms with respect to a left perturbation
/// R <- exp(eps) R:  J_k = w_k / sqrt(1 - c_k^2) * delta_k^T [R d_k]_x with
/// c_k = delta_k . R d_k. Axes with |c_k| >= 1 - 1e-12 give a zero row.
std::vector<Eigen::RowVector3d> rotation_jacobian(const Rotation& rotation,
                                                  const RotationProblem& problem);
std::vector<Eigen::RowVector3d> rotation_jacobian(const Eigen::Vector3d& omega,
                                                  const RotationProblem& problem);

/// Gradient of rotation_cost, the sum of the per-axis rows.
Eigen::RowVector3d rotation_cost_gradient(const Rotation& rotation, const RotationProblem& problem);

struct LmConfig {
  double initial_lambda = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  int max_iterations = 20;
  double cost_tolerance = 1e-10;
  double step_tolerance = 1e-10;
};

struct RotationEstimate {
  Rotation rotation;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
};

/// Levenberg-Marquardt on the per-axis angle residuals, starting from
/// problem.initial. A step is accepted only if the summed angle decreases,
/// so final_cost <= initial_cost always holds.
/// Throws kUnderconstrained for fewer than two matched axes.
RotationEstimate optimize_rotation(const RotationProblem& problem, const LmConfig& config = {});

}  // namespace vpslam
