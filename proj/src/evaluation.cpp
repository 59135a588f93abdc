#include "vpslam/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "vpslam/error.hpp"

namespace vpslam {

AssociatedPositions associate(const std::vector<Pose>& est, const std::vector<Pose>& gt, double max_dt) {
  AssociatedPositions out;
  std::vector<double> stamps;
  stamps.reserve(gt.size());
  for (const Pose& p : gt) stamps.push_back(p.timestamp);
  std::vector<bool> used(gt.size(), false);

  for (const Pose& e : est) {
    const auto it = std::lower_bound(stamps.begin(), stamps.end(), e.timestamp);
    std::ptrdiff_t best = -1;
    double best_dt = max_dt;
    for (auto cand : {it - 1, it}) {
      if (cand < stamps.begin() || cand >= stamps.end()) continue;
      const auto idx = cand - stamps.begin();
      const double dt = std::abs(*cand - e.timestamp);
      if (!used[static_cast<std::size_t>(idx)] && dt <= best_dt) {
        best_dt = dt;
        best = idx;
      }
    }
    if (best < 0) {
      ++out.unmatched;
      continue;
    }
    used[static_cast<std::size_t>(best)] = true;
    out.est.push_back(e.camera_center());
    out.gt.push_back(gt[static_cast<std::size_t>(best)].camera_center());
    out.timestamps.push_back(e.timestamp);
  }
  return out;
}

Similarity umeyama_align_7dof(std::span<const Eigen::Vector3d> est, std::span<const Eigen::Vector3d> gt) {
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::kInvalidArgument, "alignment inputs differ in length");
  }
  if (est.size() < 3) {
    throw Error(ErrorCode::kInsufficientPairs, "alignment needs at least three position pairs");
  }
  const double n = static_cast<double>(est.size());
  Eigen::Vector3d mu_e = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_g = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    mu_e += est[i];
    mu_g += gt[i];
  }
  mu_e /= n;
  mu_g /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_e = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Eigen::Vector3d de = est[i] - mu_e;
    cov += (gt[i] - mu_g) * de.transpose();
    var_e += de.squaredNorm();
  }
  cov /= n;
  var_e /= n;

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();
  if (!(var_e > 0.0) || !(d(0) > 0.0) || d(1) <= 1e-10 * d(0)) {
    throw Error(ErrorCode::kCollinearDegenerate, "positions are collinear; rotation is unobservable");
  }
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

  Similarity sim;
  sim.rotation = Rotation::from_matrix(svd.matrixU() * s * svd.matrixV().transpose(), 1e-8);
  sim.scale = (d.asDiagonal() * s).trace() / var_e;
  sim.translation = mu_g - sim.scale * (sim.rotation * mu_e);
  return sim;
}

Similarity umeyama_align_7dof(const std::vector<Pose>& est, const std::vector<Pose>& gt) {
  const AssociatedPositions assoc = associate(est, gt);
  return umeyama_align_7dof(assoc.est, assoc.gt);
}

AteResult evaluate_ate(std::span<const Eigen::Vector3d> est, std::span<const Eigen::Vector3d> gt) {
  AteResult out;
  out.alignment = umeyama_align_7dof(est, gt);
  double sum = 0.0;
  out.residuals.reserve(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double r = (gt[i] - out.alignment.apply(est[i])).norm();
    out.residuals.push_back(r);
    sum += r * r;
  }
  out.rmse = std::sqrt(sum / static_cast<double>(est.size()));
  return out;
}

AteResult evaluate_ate(const std::vector<Pose>& est, const std::vector<Pose>& gt) {
  const AssociatedPositions assoc = associate(est, gt);
  AteResult out = evaluate_ate(assoc.est, assoc.gt);
  out.timestamps = assoc.timestamps;
  out.unmatched = assoc.unmatched;
  return out;
}

double ate_rmse(const std::vector<Pose>& est, const std::vector<Pose>& gt) {
  return evaluate_ate(est, gt).rmse;
}

}  // namespace vpslam
