#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vpslam/error.hpp"
#include "vpslam/manhattan_rotation.hpp"
#include "vpslam/synthworld.hpp"

namespace vpslam {
namespace {

using testing::kDeg;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

double sign_free_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::min(1.0, std::abs(a.normalized().dot(b.normalized()))));
}

// Unit normals orthogonal to d plus isotropic Gaussian perturbation.
std::vector<Eigen::Vector3d> normals_around(const Eigen::Vector3d& d, int n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Eigen::Vector3d> out;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d r = testing::random_unit(rng);
    Eigen::Vector3d s = (r - r.dot(d) * d).normalized();
    s += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    out.push_back(s.normalized());
  }
  return out;
}

TEST(DominantDirection, TwoNormalsGiveTheirCross) {
  const std::vector<Eigen::Vector3d> n{{1, 0, 0}, {0, 1, 0}};
  EXPECT_LT((dominant_direction(n).direction - Eigen::Vector3d(0, 0, 1)).norm(), 1e-15);
}

TEST(DominantDirection, IdenticalNormalsAreDegenerate) {
  const std::vector<Eigen::Vector3d> n{{1, 0, 0}, {1, 0, 0}};
  EXPECT_EQ(code_of([&] { dominant_direction(n); }), ErrorCode::kDegenerateCluster);
  const std::vector<Eigen::Vector3d> one{{1, 0, 0}};
  EXPECT_EQ(code_of([&] { dominant_direction(one); }), ErrorCode::kInsufficientLines);
}

TEST(DominantDirection, RecoversKnownNullDirection) {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d d = testing::random_unit(rng);
    const auto normals = normals_around(d, 20, 1e-3, rng);
    const DominantDirection out = dominant_direction(normals);
    EXPECT_LT(sign_free_angle(out.direction, d), 0.1 * kDeg);
    EXPECT_GE(out.direction.z(), 0.0);
    double worst = 0.0;
    for (const auto& s : normals) worst = std::max(worst, std::abs(s.dot(out.direction)));
    EXPECT_NEAR(out.residual, worst, 1e-15);
  }
}

TEST(DominantDirection, InvariantToScaleAndOrder) {
  std::mt19937_64 rng(21);
  const auto normals = normals_around(testing::random_unit(rng), 15, 1e-2, rng);
  const Eigen::Vector3d base = dominant_direction(normals).direction;
  auto scaled = normals;
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (auto& s : scaled) s *= (rng() % 2 ? -1.0 : 1.0) * scale(rng);
  std::shuffle(scaled.begin(), scaled.end(), rng);
  EXPECT_LT((dominant_direction(scaled).direction - base).norm(), 1e-12);
}

TEST(DominantDirection, UniformWeightsMatchUnweighted) {
  std::mt19937_64 rng(22);
  const auto normals = normals_around(testing::random_unit(rng), 12, 1e-2, rng);
  const std::vector<double> w(normals.size(), 3.7);
  EXPECT_LT((dominant_direction(normals, w).direction - dominant_direction(normals).direction).norm(), 1e-12);
  const std::vector<double> short_w(3, 1.0);
  EXPECT_EQ(code_of([&] { dominant_direction(normals, short_w); }), ErrorCode::kInvalidArgument);
  std::vector<double> bad = w;
  bad[0] = 0.0;
  EXPECT_EQ(code_of([&] { dominant_direction(normals, bad); }), ErrorCode::kInvalidArgument);
}

TEST(DominantDirection, WeightedSolutionMinimizesWeightedResidual) {
  // Optimality check against random unit directions nearby.
  std::mt19937_64 rng(23);
  const Eigen::Vector3d d = testing::random_unit(rng);
  const auto normals = normals_around(d, 30, 2e-2, rng);
  std::vector<double> w;
  std::uniform_real_distribution<double> u(0.5, 5.0);
  for (std::size_t i = 0; i < normals.size(); ++i) w.push_back(u(rng));
  const Eigen::Vector3d best = dominant_direction(normals, w).direction;
  const auto objective = [&](const Eigen::Vector3d& x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < normals.size(); ++i) sum += std::pow(w[i] * normals[i].dot(x), 2);
    return sum;
  };
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d probe = (best + 0.05 * testing::random_unit(rng)).normalized();
    EXPECT_GE(objective(probe), objective(best) - 1e-15);
  }
}

TEST(OrthonormalizeFrame, RotationColumnsUnchanged) {
  std::mt19937_64 rng(30);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d r = testing::random_rotation(rng).matrix();
    const ManhattanFrame f = orthonormalize_frame(r.col(0), r.col(1), r.col(2), 4);
    EXPECT_LT((f.axes - r).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(f.established_at, 4);
  }
}

TEST(OrthonormalizeFrame, PerturbedColumnsStayClose) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> e(-1e-3, 1e-3);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix3d r = testing::random_rotation(rng).matrix();
    Eigen::Matrix3d p = r;
    for (int k = 0; k < 9; ++k) p(k) += e(rng);
    const ManhattanFrame f = orthonormalize_frame(p.col(0), p.col(1), p.col(2));
    EXPECT_LT((f.axes.transpose() * f.axes - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(f.axes.determinant(), 1.0, 1e-12);
    EXPECT_LT(testing::trace_angle(f.axes, r), 0.2 * kDeg);
  }
}

TEST(OrthonormalizeFrame, LeftHandedInputFlipsThirdDirection) {
  std::mt19937_64 rng(32);
  const Eigen::Matrix3d r = testing::random_rotation(rng).matrix();
  const ManhattanFrame f = orthonormalize_frame(r.col(0), r.col(1), -r.col(2));
  EXPECT_LT((f.axes - r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OrthonormalizeFrame, NonOrthogonalInputRejected) {
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  EXPECT_EQ(code_of([&] { orthonormalize_frame(x, x, Eigen::Vector3d::UnitZ()); }), ErrorCode::kNotFrameLike);
}

TEST(Refinement, NoiseFreeSceneRefinesToTruth) {
  const CameraIntrinsics K = synth::default_intrinsics();
  const synth::SyntheticScene scene =
      synth::generate_scene(3, 30, 10, synth::default_extents(synth::TrajectoryStyle::kOrbit));
  const Pose pose = synth::generate_trajectory(3, 2, synth::TrajectoryStyle::kOrbit).front();
  const FrameObservation obs = synth::render_frame(scene, pose, K, {}, 3);
  const VanishingPointSet vps = detect_vanishing_points(obs.lines, K);
  const RefinedVanishingPoints refined = refine_vanishing_points(obs.lines, vps);
  EXPECT_EQ(refined.qualified_axes(), 3);
  for (int k = 0; k < 3; ++k) {
    double best = 10.0;
    for (int j = 0; j < 3; ++j) best = std::min(best, sign_free_angle(refined.directions[k], pose.rotation.matrix().col(j)));
    EXPECT_LT(best, 1e-7);
  }
  EXPECT_EQ(refined.observed().directions.size(), 3u);
}

TEST(Refinement, TwoQualifiedAxesCompletedByCross) {
  RefinedVanishingPoints r;
  r.directions = {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};
  r.refined = {true, false, true};
  r.cluster_sizes = {9, 2, 7};
  const ObservedDirections obs = r.observed();
  ASSERT_EQ(obs.directions.size(), 3u);
  EXPECT_LT((obs.directions[2] - Eigen::Vector3d(0, -1, 0)).norm(), 1e-15);
  EXPECT_EQ(obs.line_counts, (std::vector<int>{9, 7, 7}));
  r.refined = {true, false, false};
  EXPECT_TRUE(r.observed().directions.empty());
}

// ---- association -------------------------------------------------------

TEST(MatchVps, RecoversPermutationAndSigns) {
  std::mt19937_64 rng(40);
  ManhattanFrame frame;
  frame.axes = testing::random_rotation(rng).matrix();
  const std::vector<Eigen::Vector3d> deltas{-frame.axis(2), frame.axis(0), -frame.axis(1)};
  const RotationProblem p = match_vps_to_frame(deltas, frame, Rotation());
  ASSERT_EQ(p.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(p.frame_axis[k], static_cast<int>(k));
    EXPECT_LT((p.deltas[k] - frame.axis(p.frame_axis[k])).norm(), 1e-15);
    EXPECT_EQ(p.weights[k], 1.0);
  }
}

TEST(MatchVps, FiveDegreeRotationKeepsAllAxes) {
  std::mt19937_64 rng(41);
  ManhattanFrame frame;
  frame.axes = testing::random_rotation(rng).matrix();
  const Rotation truth = testing::perturb(Rotation(), 5 * kDeg, rng);
  std::vector<Eigen::Vector3d> deltas;
  for (int k = 0; k < 3; ++k) deltas.push_back(truth * frame.axis(k));
  EXPECT_EQ(match_vps_to_frame(deltas, frame, Rotation()).size(), 3u);
}

TEST(MatchVps, FarDirectionsAreDroppedOrRejected) {
  ManhattanFrame frame;
  const Rotation r = testing::rotation_about(Eigen::Vector3d::UnitZ(), 30 * kDeg);
  // z stays matched, x and y are 30 deg away from every predicted axis.
  std::vector<Eigen::Vector3d> deltas{r * Eigen::Vector3d::UnitX(), r * Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};
  const RotationProblem p = match_vps_to_frame(deltas, frame, Rotation());
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.frame_axis[0], 2);
  deltas.pop_back();
  EXPECT_EQ(code_of([&] { match_vps_to_frame(deltas, frame, Rotation()); }), ErrorCode::kNoMatch);
}

TEST(MatchVps, InvariantToInputPermutation) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    ManhattanFrame frame;
    frame.axes = testing::random_rotation(rng).matrix();
    const Rotation truth = testing::perturb(Rotation(), 8 * kDeg, rng);
    std::vector<Eigen::Vector3d> deltas;
    std::vector<double> weights{3, 5, 7};
    for (int k = 0; k < 3; ++k) deltas.push_back(testing::perturb(truth, 1 * kDeg, rng) * frame.axis(k));
    const RotationProblem a = match_vps_to_frame(deltas, frame, Rotation(), weights);
    std::array<int, 3> order{2, 0, 1};
    std::vector<Eigen::Vector3d> pd;
    std::vector<double> pw;
    for (int i : order) {
      pd.push_back(-deltas[i]);
      pw.push_back(weights[i]);
    }
    const RotationProblem b = match_vps_to_frame(pd, frame, Rotation(), pw);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a.frame_axis[k], b.frame_axis[k]);
      EXPECT_EQ(a.deltas[k], b.deltas[k]);
      EXPECT_EQ(a.weights[k], b.weights[k]);
    }
  }
}

// ---- cost and Jacobian --------------------------------------------------

RotationProblem make_problem(const Rotation& truth, const Rotation& initial, int axes, std::mt19937_64& rng,
                             double noise = 0.0) {
  const Eigen::Matrix3d frame = testing::random_rotation(rng).matrix();
  RotationProblem p;
  p.initial = initial;
  std::normal_distribution<double> n(0.0, noise);
  for (int k = 0; k < axes; ++k) {
    Eigen::Vector3d delta = truth * frame.col(k);
    if (noise > 0.0) delta = (Rotation::exp({n(rng), n(rng), n(rng)}) * delta).normalized();
    p.deltas.push_back(delta);
    p.dirs.push_back(frame.col(k));
    p.frame_axis.push_back(k);
    p.weights.push_back(1.0);
  }
  return p;
}

TEST(RotationCost, ZeroAtExactAlignment) {
  std::mt19937_64 rng(50);
  for (int i = 0; i < 100; ++i) {
    const Rotation truth = testing::random_rotation(rng);
    const RotationProblem p = make_problem(truth, truth, 3, rng);
    EXPECT_LT(rotation_cost(truth, p), 1e-9);
  }
}

TEST(RotationCost, SingleTenDegreePair) {
  RotationProblem p;
  p.deltas = {Eigen::Vector3d(std::cos(10 * kDeg), std::sin(10 * kDeg), 0)};
  p.dirs = {Eigen::Vector3d::UnitX()};
  p.weights = {1.0};
  EXPECT_NEAR(rotation_cost(Rotation(), p), 0.17453292519943295, 1e-15);
  EXPECT_NEAR(rotation_cost(Eigen::Vector3d::Zero().eval(), p), 0.17453292519943295, 1e-15);
}

// Central differences of one axis' angle under R <- exp(eps) R.
Eigen::RowVector3d fd_row(const RotationProblem& p, std::size_t k, const Rotation& r, double h) {
  Eigen::RowVector3d row;
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(j) = h;
    const double plus = std::acos(std::clamp(p.deltas[k].dot(Rotation::exp(e) * r * p.dirs[k]), -1.0, 1.0));
    const double minus = std::acos(std::clamp(p.deltas[k].dot(Rotation::exp(-e) * r * p.dirs[k]), -1.0, 1.0));
    row(j) = p.weights[k] * (plus - minus) / (2 * h);
  }
  return row;
}

TEST(RotationJacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(60);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    RotationProblem p;
    for (int k = 0; k < 3; ++k) {
      p.deltas.push_back(testing::random_unit(rng));
      p.dirs.push_back(testing::random_unit(rng));
      p.weights.push_back(1.0);
    }
    const Rotation r = testing::random_rotation(rng);
    bool ok = true;
    for (int k = 0; k < 3; ++k) ok = ok && std::abs(p.deltas[k].dot(r * p.dirs[k])) < 0.999;
    if (!ok) continue;
    const auto rows = rotation_jacobian(r, p);
    for (std::size_t k = 0; k < 3; ++k) {
      const Eigen::RowVector3d fd = fd_row(p, k, r, 1e-6);
      worst = std::max(worst, (rows[k] - fd).norm() / std::max(fd.norm(), 1e-12));
    }
    ++checked;
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(RotationJacobian, AlignedAxisGivesZeroRow) {
  RotationProblem p;
  p.deltas = {Eigen::Vector3d::UnitX()};
  p.dirs = {Eigen::Vector3d::UnitX()};
  p.weights = {1.0};
  EXPECT_EQ(rotation_jacobian(Rotation(), p)[0], Eigen::RowVector3d::Zero());
}

TEST(RotationJacobian, PerpendicularPairHasUnitNorm) {
  RotationProblem p;
  p.deltas = {Eigen::Vector3d::UnitY()};
  p.dirs = {Eigen::Vector3d::UnitX()};
  p.weights = {1.0};
  EXPECT_NEAR(rotation_jacobian(Rotation(), p)[0].norm(), 1.0, 1e-15);
}

TEST(RotationJacobian, GradientIsSumOfRows) {
  std::mt19937_64 rng(61);
  const RotationProblem p = make_problem(testing::random_rotation(rng), Rotation(), 3, rng);
  const auto rows = rotation_jacobian(Rotation(), p);
  EXPECT_LT((rotation_cost_gradient(Rotation(), p) - (rows[0] + rows[1] + rows[2])).norm(), 1e-15);
}

// ---- optimization -------------------------------------------------------

TEST(OptimizeRotation, NoiseFreeFromFiveDegrees) {
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 100; ++trial) {
    const Rotation truth = testing::random_rotation(rng);
    const RotationProblem p = make_problem(truth, testing::perturb(truth, 5 * kDeg, rng), 3, rng);
    const RotationEstimate est = optimize_rotation(p);
    EXPECT_LT(testing::trace_angle(est.rotation.matrix(), truth.matrix()), 1e-4);
    EXPECT_LE(est.final_cost, est.initial_cost);
    // Optimum aligns every pair.
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_LT((est.rotation * p.dirs[k] - p.deltas[k]).norm(), 1e-6);
  }
}

TEST(OptimizeRotation, TwoAxesSuffice) {
  std::mt19937_64 rng(71);
  const Rotation truth = testing::random_rotation(rng);
  const RotationProblem p = make_problem(truth, testing::perturb(truth, 5 * kDeg, rng), 2, rng);
  EXPECT_LT(testing::trace_angle(optimize_rotation(p).rotation.matrix(), truth.matrix()), 1e-4);
}

TEST(OptimizeRotation, NoisyDirectionsImproveOnInitialGuess) {
  std::mt19937_64 rng(72);
  int improved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Rotation truth = testing::random_rotation(rng);
    const Rotation initial = testing::perturb(truth, 5 * kDeg, rng);
    const RotationProblem p = make_problem(truth, initial, 3, rng, 0.5 * kDeg / std::sqrt(3.0));
    const RotationEstimate est = optimize_rotation(p);
    improved += testing::trace_angle(est.rotation.matrix(), truth.matrix()) <
                testing::trace_angle(initial.matrix(), truth.matrix());
    EXPECT_LE(est.final_cost, est.initial_cost);
  }
  EXPECT_GE(improved, 95);
}

TEST(OptimizeRotation, CostNeverIncreases) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 200; ++trial) {
    RotationProblem p;
    for (int k = 0; k < 3; ++k) {
      p.deltas.push_back(testing::random_unit(rng));
      p.dirs.push_back(testing::random_unit(rng));
      p.weights.push_back(1.0);
    }
    p.initial = testing::random_rotation(rng);
    const RotationEstimate est = optimize_rotation(p);
    EXPECT_LE(est.final_cost, est.initial_cost);
    EXPECT_DOUBLE_EQ(est.final_cost, rotation_cost(est.rotation, p));
    const Eigen::Matrix3d m = est.rotation.matrix();
    EXPECT_LT((m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(OptimizeRotation, SingleAxisIsUnderconstrained) {
  std::mt19937_64 rng(74);
  const RotationProblem p = make_problem(Rotation(), Rotation(), 1, rng);
  EXPECT_EQ(code_of([&] { optimize_rotation(p); }), ErrorCode::kUnderconstrained);
}

}  // namespace
}  // namespace vpslam
