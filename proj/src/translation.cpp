#include "vpslam/translation.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "vpslam/error.hpp"

namespace vpslam {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

TranslationSystem build_translation_system(std::span<const PointCorrespondence> corrs,
                                           std::span<const std::size_t> indices,
                                           const Rotation& rotation, const CameraIntrinsics& K) {
  if (indices.size() < 2) {
    throw Error(ErrorCode::kInsufficientPoints, "translation needs at least two correspondences");
  }
  const auto n = static_cast<Eigen::Index>(indices.size());
  TranslationSystem sys;
  sys.A.setZero(2 * n, 3);
  sys.b.setZero(2 * n);
  sys.row_map.assign(indices.begin(), indices.end());
  for (Eigen::Index k = 0; k < n; ++k) {
    const PointCorrespondence& c = corrs[indices[static_cast<std::size_t>(k)]];
    const Eigen::Vector2d xn = K.normalize(c.x);
    const Eigen::Vector3d rx = rotation * c.X;
    sys.A.row(2 * k) << -1.0, 0.0, xn.x();
    sys.A.row(2 * k + 1) << 0.0, -1.0, xn.y();
    sys.b(2 * k) = rx.x() - rx.z() * xn.x();
    sys.b(2 * k + 1) = rx.y() - rx.z() * xn.y();
  }
  return sys;
}

TranslationSystem build_translation_system(std::span<const PointCorrespondence> corrs,
                                           const Rotation& rotation, const CameraIntrinsics& K) {
  std::vector<std::size_t> all(corrs.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return build_translation_system(corrs, all, rotation, K);
}

Eigen::Vector3d solve_normal_equations(const TranslationSystem& system) {
  const Eigen::Matrix3d ata = system.A.transpose() * system.A;
  const Eigen::Vector3d atb = system.A.transpose() * system.b;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(ata, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(2);
  if (!(lo > 0.0) || hi / lo >= 1e12) {
    throw Error(ErrorCode::kRankDeficient, "translation system is rank deficient");
  }
  return ata.ldlt().solve(atb);
}

double reprojection_error(const PointCorrespondence& corr, const Pose& pose,
                          const CameraIntrinsics& K) {
  const Eigen::Vector3d xc = pose.transform(corr.X);
  if (!(xc.z() > 1e-9)) return std::numeric_limits<double>::infinity();
  const Eigen::Vector2d uv(K.fx * xc.x() / xc.z() + K.cx, K.fy * xc.y() / xc.z() + K.cy);
  return (uv - corr.x).norm();
}

TranslationEstimate ransac_translation(std::span<const PointCorrespondence> corrs,
                                       const Rotation& rotation, const CameraIntrinsics& K,
                                       const RansacConfig& config) {
  const std::size_t n = corrs.size();
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientPoints, "translation needs at least two correspondences");
  }

  auto consensus = [&](const Eigen::Vector3d& t, std::vector<bool>& mask) {
    const Pose pose{rotation, t, 0.0};
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = reprojection_error(corrs[i], pose, K) <= config.inlier_threshold_px;
      count += mask[i] ? 1 : 0;
    }
    return count;
  };

  TranslationEstimate best;
  best.inliers.assign(n, false);
  std::vector<bool> mask(n, false);
  for (int it = 0; it < config.iterations; ++it) {
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(it))));
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::uniform_int_distribution<std::size_t> second(0, n - 2);
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;

    const std::array<std::size_t, 2> sample{i, j};
    Eigen::Vector3d t;
    try {
      t = solve_normal_equations(build_translation_system(corrs, sample, rotation, K));
    } catch (const Error&) {
      continue;
    }
    const int count = consensus(t, mask);
    if (count > best.inlier_count) {
      best.inlier_count = count;
      best.inliers = mask;
      best.translation = t;
    }
  }

  if (best.inlier_count < config.min_inliers) {
    throw Error(ErrorCode::kNoConsensus, "no translation hypothesis reached the minimum consensus");
  }

  std::vector<std::size_t> inlier_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (best.inliers[i]) inlier_idx.push_back(i);
  }
  try {
    best.translation = solve_normal_equations(build_translation_system(corrs, inlier_idx, rotation, K));
  } catch (const Error&) {
    // Keep the minimal-sample hypothesis.
  }
  return best;
}

}  // namespace vpslam
