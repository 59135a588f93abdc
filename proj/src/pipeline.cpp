#include "vpslam/pipeline.hpp"

#include <sstream>

#include "vpslam/error.hpp"

namespace vpslam {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t frame_seed(std::uint64_t seed, int frame_index) {
  return seed + kGolden * (static_cast<std::uint64_t>(frame_index) + 1);
}

}  // namespace

std::string describe_flags(unsigned flags) {
  static constexpr std::pair<unsigned, const char*> kNames[] = {
      {kFlagVpDetectionFailed, "vp_failed"},
      {kFlagTooFewClusters, "too_few_clusters"},
      {kFlagNotAnchored, "not_anchored"},
      {kFlagAnchoredHere, "anchored"},
      {kFlagNoAxisMatch, "no_axis_match"},
      {kFlagRotationDisabled, "rotation_disabled"},
      {kFlagTranslationFallback, "translation_fallback"},
      {kFlagTranslationDisabled, "translation_disabled"},
      {kFlagRotationRejected, "rotation_rejected"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if ((flags & bit) == 0) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

Pose propagate_pose(const Pose& last, const std::optional<Pose>& prev) {
  if (!prev) return last;
  const Pose velocity = last * prev->inverse();
  Pose pred = velocity * last;
  pred.timestamp = last.timestamp;
  return pred;
}

Tracker::Tracker(const CameraIntrinsics& K, TrackerConfig config) : K_(K), config_(config) {
  K_.validate();
}

Pose Tracker::propagate_pose() const {
  if (!last_) {
    throw Error(ErrorCode::kNoPrior, "no prior pose to propagate");
  }
  return vpslam::propagate_pose(*last_, prev_);
}

void Tracker::push_pose(const Pose& pose) {
  prev_ = last_;
  last_ = pose;
}

Tracker::Observed Tracker::observe_directions(const FrameObservation& obs,
                                              FrameDiagnostics& diag) const {
  Observed out;
  std::vector<LineObservation>& lines = out.lines;
  lines.reserve(obs.lines.size());
  for (const auto& line : obs.lines) {
    if (line.length >= config_.vp.min_length) lines.push_back(line);
  }

  VpDetectorConfig vp = config_.vp;
  vp.accumulator.seed = frame_seed(config_.vp.accumulator.seed, obs.frame_index);
  try {
    const VanishingPointSet vps = detect_vanishing_points(lines, K_, vp);
    out.refined = refine_vanishing_points(lines, vps, config_.refine);
  } catch (const Error&) {
    diag.flags |= kFlagVpDetectionFailed;
    return out;
  }
  diag.cluster_sizes = out.refined->cluster_sizes;
  diag.qualified_axes = out.refined->qualified_axes();
  out.directions = out.refined->observed();
  if (out.directions.directions.size() < 2) diag.flags |= kFlagTooFewClusters;
  return out;
}

void Tracker::try_anchor(const Observed& observed, const Rotation& rotation, int frame_index,
                         FrameDiagnostics& diag) {
  const auto& dirs = observed.directions.directions;
  if (dirs.size() < 3) return;
  try {
    ManhattanFrame in_camera = orthonormalize_frame(dirs[0], dirs[1], dirs[2], frame_index);
    // d_k is stored in world coordinates: d_world = R^T d_camera.
    ManhattanFrame frame;
    frame.axes = rotation.inverse().matrix() * in_camera.axes;
    frame.established_at = frame_index;
    frame_ = frame;
    diag.flags |= kFlagAnchoredHere;
  } catch (const Error&) {
    diag.flags |= kFlagTooFewClusters;
  }
}

Pose Tracker::initialize(const FrameObservation& obs, const Pose& pose) {
  frame_.reset();
  last_.reset();
  prev_.reset();
  diagnostics_.clear();

  FrameDiagnostics diag;
  diag.frame_index = obs.frame_index;
  diag.timestamp = obs.timestamp;
  Pose out = pose;
  out.timestamp = obs.timestamp;
  if (obs.lines.size() >= 2) {
    const Observed observed = observe_directions(obs, diag);
    try_anchor(observed, out.rotation, obs.frame_index, diag);
  }
  if (!frame_) diag.flags |= kFlagNotAnchored;
  diag.translation_inliers = static_cast<int>(obs.points.size());
  diagnostics_.push_back(diag);
  push_pose(out);
  return out;
}

Pose Tracker::track_frame(const FrameObservation& obs) {
  if (obs.lines.size() < 2 || obs.points.size() < 2) {
    throw Error(ErrorCode::kInsufficientObservations,
                "a frame needs at least two lines and two point correspondences");
  }
  const Pose predicted = propagate_pose();

  FrameDiagnostics diag;
  diag.frame_index = obs.frame_index;
  diag.timestamp = obs.timestamp;

  struct Candidate {
    Rotation rotation;
    int matched_axes = 0;
    RotationEstimate estimate;
  };
  std::vector<Candidate> candidates;

  const Observed observed = observe_directions(obs, diag);
  if (!frame_) {
    try_anchor(observed, predicted.rotation, obs.frame_index, diag);
    if (!frame_) diag.flags |= kFlagNotAnchored;
  } else if (!config_.optimize_rotation) {
    diag.flags |= kFlagRotationDisabled;
  } else {
    const bool verify = config_.verify_rotation && config_.refine_translation;
    // A second start from the last pose keeps one noisy velocity estimate
    // from pushing the prediction outside the association gate.
    std::vector<Rotation> starts{predicted.rotation};
    if (verify) starts.push_back(last_->rotation);

    const auto add_candidates = [&](const ObservedDirections& dirs, const Rotation& start) {
      if (dirs.directions.size() < 2) return;
      std::vector<double> weights;
      if (config_.weight_by_line_count) {
        for (int count : dirs.line_counts) weights.push_back(count);
      }
      try {
        const RotationProblem problem = match_vps_to_frame(dirs.directions, *frame_, start, weights);
        const RotationEstimate est = optimize_rotation(problem, config_.lm);
        candidates.push_back({est.rotation, static_cast<int>(problem.size()), est});
      } catch (const Error&) {
      }
    };
    for (const Rotation& start : starts) add_candidates(observed.directions, start);
    if (verify && config_.guided_refinement && observed.lines.size() >= 2) {
      for (const Rotation& start : starts) {
        VanishingPointSet seeds;
        for (int k = 0; k < 3; ++k) seeds.directions[k] = start * frame_->axis(k);
        const RefinedVanishingPoints guided =
            refine_vanishing_points(observed.lines, seeds, config_.refine);
        add_candidates(guided.observed(), start);
      }
    }
    if (candidates.empty()) diag.flags |= kFlagNoAxisMatch;
  }
  const std::size_t n_vp = candidates.size();
  candidates.push_back({predicted.rotation, 0, {}});
  // Zero-velocity fallback, so a frame without a usable rotation does not
  // keep extrapolating a bad velocity.
  if (config_.verify_rotation && config_.optimize_rotation) {
    candidates.push_back({last_->rotation, 0, {}});
  }

  const auto record = [&](const Candidate& c) {
    diag.matched_axes = c.matched_axes;
    diag.cost_before = c.estimate.initial_cost;
    diag.cost_after = c.estimate.final_cost;
    diag.lm_iterations = c.estimate.iterations;
  };

  std::size_t chosen = 0;
  Eigen::Vector3d translation = predicted.translation;
  if (config_.refine_translation) {
    RansacConfig ransac = config_.ransac;
    ransac.seed = frame_seed(config_.ransac.seed, obs.frame_index);
    // Without verification only the first candidate is tried.
    const std::size_t n_try = config_.verify_rotation ? candidates.size() : 1;
    int best_inliers = -1;
    for (std::size_t i = 0; i < n_try; ++i) {
      try {
        const TranslationEstimate est = ransac_translation(obs.points, candidates[i].rotation, K_, ransac);
        if (est.inlier_count > best_inliers) {
          best_inliers = est.inlier_count;
          chosen = i;
          translation = est.translation;
        }
      } catch (const Error&) {
      }
    }
    if (best_inliers < 0) {
      diag.flags |= kFlagTranslationFallback;
    } else {
      diag.translation_inliers = best_inliers;
    }
  } else {
    diag.flags |= kFlagTranslationDisabled;
  }
  if (n_vp > 0 && chosen >= n_vp) diag.flags |= kFlagRotationRejected;
  record(candidates[chosen]);

  const Pose out{candidates[chosen].rotation, translation, obs.timestamp};
  diagnostics_.push_back(diag);
  push_pose(out);
  return out;
}

SequenceResult run_sequence(std::span<const FrameObservation> observations, const CameraIntrinsics& K,
                            const TrackerConfig& config, const std::optional<Pose>& initial_pose) {
  if (observations.size() < 2) {
    throw Error(ErrorCode::kInsufficientObservations, "a sequence needs at least two frames");
  }
  Tracker tracker(K, config);
  SequenceResult result;
  result.trajectory.reserve(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const FrameObservation& obs = observations[i];
    try {
      if (i == 0) {
        result.trajectory.push_back(tracker.initialize(obs, initial_pose.value_or(Pose{})));
      } else {
        result.trajectory.push_back(tracker.track_frame(obs));
      }
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "frame " << obs.frame_index << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
  }
  result.diagnostics = tracker.diagnostics();
  return result;
}

}  // namespace vpslam
