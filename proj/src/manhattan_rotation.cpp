#include "vpslam/manhattan_rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "vpslam/error.hpp"

namespace vpslam {

DominantDirection dominant_direction(std::span<const Eigen::Vector3d> normals) {
  const std::vector<double> ones(normals.size(), 1.0);
  return dominant_direction(normals, ones);
}

DominantDirection dominant_direction(std::span<const Eigen::Vector3d> normals,
                                     std::span<const double> weights) {
  if (normals.size() < 2) {
    throw Error(ErrorCode::kInsufficientLines, "a cluster needs at least two lines");
  }
  if (weights.size() != normals.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one weight per normal is required");
  }
  Eigen::MatrixX3d s(static_cast<Eigen::Index>(normals.size()), 3);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::kInvalidArgument, "normal weights must be positive");
    }
    s.row(static_cast<Eigen::Index>(i)) = weights[i] * normals[i].normalized().transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixX3d> svd(s, Eigen::ComputeFullV);
  Eigen::Vector3d sigma = Eigen::Vector3d::Zero();
  sigma.head(svd.singularValues().size()) = svd.singularValues();
  // Relative to the largest weight so the test does not depend on units.
  const double scale = *std::max_element(weights.begin(), weights.end());
  if ((sigma(1) - sigma(2)) / scale < 1e-6) {
    throw Error(ErrorCode::kDegenerateCluster, "cluster normals do not span a plane");
  }

  DominantDirection out;
  out.direction = canonical_hemisphere(svd.matrixV().col(2));
  Eigen::VectorXd dots(static_cast<Eigen::Index>(normals.size()));
  for (std::size_t i = 0; i < normals.size(); ++i) {
    dots(static_cast<Eigen::Index>(i)) = normals[i].normalized().dot(out.direction);
  }
  out.residual = dots.cwiseAbs().maxCoeff();
  return out;
}

ManhattanFrame orthonormalize_frame(const Eigen::Vector3d& d1, const Eigen::Vector3d& d2,
                                    const Eigen::Vector3d& d3, int established_at) {
  Eigen::Matrix3d m;
  m << d1.normalized(), d2.normalized(), d3.normalized();
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (!(std::abs(m.col(i).dot(m.col(j))) < 0.2)) {
        throw Error(ErrorCode::kNotFrameLike, "directions are too far from orthogonal");
      }
    }
  }
  // Directions are sign-free; fix handedness on the input so the polar
  // factor below is already a rotation. For near-orthogonal input all
  // singular values are ~1 and flipping a singular vector would pick an
  // arbitrary reflection plane.
  if (m.determinant() < 0.0) m.col(2) *= -1.0;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) *= -1.0;

  ManhattanFrame frame;
  frame.axes = u * svd.matrixV().transpose();
  frame.established_at = established_at;
  return frame;
}

int RefinedVanishingPoints::qualified_axes() const {
  return static_cast<int>(std::count(refined.begin(), refined.end(), true));
}

ObservedDirections RefinedVanishingPoints::observed() const {
  ObservedDirections out;
  for (int k = 0; k < 3; ++k) {
    if (!refined[k]) continue;
    out.directions.push_back(directions[k]);
    out.line_counts.push_back(cluster_sizes[k]);
  }
  if (out.directions.size() == 2) {
    const Eigen::Vector3d third = out.directions[0].cross(out.directions[1]);
    if (!(third.norm() > 1e-6)) {
      out.directions.clear();
      out.line_counts.clear();
      return out;
    }
    out.directions.push_back(third.normalized());
    out.line_counts.push_back(std::min(out.line_counts[0], out.line_counts[1]));
  } else if (out.directions.size() < 2) {
    out.directions.clear();
    out.line_counts.clear();
  }
  return out;
}

RefinedVanishingPoints refine_vanishing_points(std::span<const LineObservation> lines,
                                               const VanishingPointSet& vps,
                                               const RefinementConfig& config) {
  RefinedVanishingPoints out;
  out.directions = vps.directions;
  const int min_lines = std::max(config.min_cluster_lines, 2);

  for (int pass = 0; pass < std::max(config.passes, 1); ++pass) {
    const std::vector<int> labels = cluster_lines(lines, out.directions, config.tau);
    for (int k = 0; k < 3; ++k) {
      std::vector<Eigen::Vector3d> normals;
      std::vector<double> weights;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (labels[i] != k) continue;
        normals.push_back(lines[i].s);
        weights.push_back(config.weight_by_length && lines[i].length > 0.0 ? lines[i].length : 1.0);
      }
      if (static_cast<int>(normals.size()) < min_lines) {
        out.refined[k] = false;
        continue;
      }
      try {
        out.directions[k] = dominant_direction(normals, weights).direction;
        out.refined[k] = true;
      } catch (const Error&) {
        out.refined[k] = false;
      }
    }
  }

  out.labels = cluster_lines(lines, out.directions, config.tau);
  out.cluster_sizes = {0, 0, 0};
  for (int label : out.labels) {
    if (label != kUnassigned) ++out.cluster_sizes[label];
  }
  return out;
}

RotationProblem match_vps_to_frame(std::span<const Eigen::Vector3d> deltas,
                                   const ManhattanFrame& frame, const Rotation& initial,
                                   std::span<const double> weights) {
  const int n = static_cast<int>(deltas.size());
  if (!weights.empty() && weights.size() != deltas.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weights must match the number of directions");
  }
  std::array<Eigen::Vector3d, 3> predicted;
  for (int j = 0; j < 3; ++j) predicted[j] = initial * frame.axis(j);

  Eigen::MatrixXd table(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) table(i, j) = std::abs(deltas[i].normalized().dot(predicted[j]));
  }

  const double gate = std::cos(20.0 * std::numbers::pi / 180.0);
  std::array<int, 3> assigned{-1, -1, -1};  // frame axis -> delta index
  std::vector<bool> row_used(n, false);
  for (int round = 0; round < std::min(n, 3); ++round) {
    double best = -1.0;
    int bi = -1;
    int bj = -1;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < 3; ++j) {
        if (assigned[j] >= 0) continue;
        if (table(i, j) > best) {
          best = table(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    row_used[bi] = true;
    assigned[bj] = bi;
  }

  RotationProblem problem;
  problem.initial = initial;
  for (int j = 0; j < 3; ++j) {
    const int i = assigned[j];
    if (i < 0 || table(i, j) < gate) continue;
    Eigen::Vector3d delta = deltas[i].normalized();
    if (delta.dot(predicted[j]) < 0.0) delta = -delta;
    problem.deltas.push_back(delta);
    problem.dirs.push_back(frame.axis(j));
    problem.frame_axis.push_back(j);
    problem.weights.push_back(weights.empty() ? 1.0 : weights[i]);
  }
  if (problem.deltas.empty()) {
    throw Error(ErrorCode::kNoMatch, "no vanishing direction within 20 degrees of a frame axis");
  }
  return problem;
}

double rotation_cost(const Rotation& rotation, const RotationProblem& problem) {
  double cost = 0.0;
  for (std::size_t k = 0; k < problem.size(); ++k) {
    // atan2 form of arccos(delta . R d); identical for unit vectors and exact
    // near zero.
    cost += problem.weights[k] * angle_between(problem.deltas[k], rotation * problem.dirs[k]);
  }
  return cost;
}

double rotation_cost(const Eigen::Vector3d& omega, const RotationProblem& problem) {
  return rotation_cost(Rotation::exp(omega), problem);
}

std::vector<Eigen::RowVector3d> rotation_jacobian(const Rotation& rotation,
                                                  const RotationProblem& problem) {
  std::vector<Eigen::RowVector3d> rows;
  rows.reserve(problem.size());
  for (std::size_t k = 0; k < problem.size(); ++k) {
    const Eigen::Vector3d& delta = problem.deltas[k];
    const Eigen::Vector3d rd = rotation * problem.dirs[k];
    const double c = delta.dot(rd);
    // sqrt(1 - c^2) evaluated as |delta x R d|.
    const double sine = delta.cross(rd).norm();
    if (sine < 1e-12 || c <= -1.0 + 1e-12) {
      rows.emplace_back(Eigen::RowVector3d::Zero());
      continue;
    }
    rows.emplace_back(problem.weights[k] / sine * (delta.transpose() * skew(rd)));
  }
  return rows;
}

std::vector<Eigen::RowVector3d> rotation_jacobian(const Eigen::Vector3d& omega,
                                                  const RotationProblem& problem) {
  return rotation_jacobian(Rotation::exp(omega), problem);
}

Eigen::RowVector3d rotation_cost_gradient(const Rotation& rotation, const RotationProblem& problem) {
  Eigen::RowVector3d g = Eigen::RowVector3d::Zero();
  for (const auto& row : rotation_jacobian(rotation, problem)) g += row;
  return g;
}

RotationEstimate optimize_rotation(const RotationProblem& problem, const LmConfig& config) {
  if (problem.size() < 2) {
    throw Error(ErrorCode::kUnderconstrained, "rotation needs at least two matched axes");
  }

  RotationEstimate est;
  est.rotation = problem.initial;
  est.initial_cost = rotation_cost(est.rotation, problem);
  double cost = est.initial_cost;
  double lambda = config.initial_lambda;

  for (int it = 0; it < config.max_iterations; ++it) {
    est.iterations = it + 1;
    const std::vector<Eigen::RowVector3d> rows = rotation_jacobian(est.rotation, problem);
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double r = problem.weights[k] *
                       angle_between(problem.deltas[k], est.rotation * problem.dirs[k]);
      h += rows[k].transpose() * rows[k];
      g += rows[k].transpose() * r;
    }
    const Eigen::Vector3d step =
        (h + lambda * Eigen::Matrix3d::Identity()).ldlt().solve(-g);
    if (!step.allFinite() || step.norm() < config.step_tolerance) break;

    const Rotation candidate = Rotation::exp(step) * est.rotation;
    const double candidate_cost = rotation_cost(candidate, problem);
    if (candidate_cost < cost) {
      const double decrease = cost - candidate_cost;
      est.rotation = candidate;
      cost = candidate_cost;
      ++est.accepted_steps;
      lambda /= config.lambda_down;
      if (decrease < config.cost_tolerance) break;
    } else {
      lambda *= config.lambda_up;
    }
  }
  est.final_cost = cost;
  return est;
}

}  // namespace vpslam
