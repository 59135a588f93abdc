#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vpslam/geometry.hpp"
#include "vpslam/manhattan_rotation.hpp"
#include "vpslam/observation.hpp"
#include "vpslam/translation.hpp"
#include "vpslam/vp_detect.hpp"

namespace vpslam {

struct TrackerConfig {
  VpDetectorConfig vp;
  RefinementConfig refine;
  LmConfig lm;
  RansacConfig ransac;
  bool optimize_rotation = true;
  bool refine_translation = true;
  bool weight_by_line_count = false;
  /// Score each rotation candidate by its translation inlier count and keep
  /// the best; needs refine_translation.
  bool verify_rotation = true;
  /// With verification on, also refine clusters seeded at the predicted
  /// Manhattan axes instead of the grid triplet and offer the result as a
  /// further candidate.
  bool guided_refinement = true;
};

/// Bits recorded in FrameDiagnostics::flags whenever a stage falls back.
enum FrameFlag : unsigned {
  kFlagNone = 0,
  kFlagVpDetectionFailed = 1u << 0,
  kFlagTooFewClusters = 1u << 1,
  kFlagNotAnchored = 1u << 2,
  kFlagAnchoredHere = 1u << 3,
  kFlagNoAxisMatch = 1u << 4,
  kFlagRotationDisabled = 1u << 5,
  kFlagTranslationFallback = 1u << 6,
  kFlagTranslationDisabled = 1u << 7,
  kFlagRotationRejected = 1u << 8,
};

/// "vp_failed|not_anchored", or "" for kFlagNone.
std::string describe_flags(unsigned flags);

struct FrameDiagnostics {
  int frame_index = 0;
  double timestamp = 0.0;
  std::array<int, 3> cluster_sizes{};
  int qualified_axes = 0;
  int matched_axes = 0;
  double cost_before = 0.0;
  double cost_after = 0.0;
  int lm_iterations = 0;
  int translation_inliers = 0;
  unsigned flags = kFlagNone;
};

/// Constant-velocity prediction for world-to-camera poses:
/// T_pred = (T_last T_prev^-1) T_last. Without `prev` the last pose is
/// returned unchanged.
Pose propagate_pose(const Pose& last, const std::optional<Pose>& prev);

/// Frame-to-frame front-end: constant-velocity prediction, vanishing-point
/// rotation refinement against the anchored Manhattan frame, then RANSAC
/// translation with the refined rotation.
class Tracker {
 public:
  explicit Tracker(const CameraIntrinsics& K, TrackerConfig config = {});

  /// Seeds the tracker with a known pose (the first frame), anchoring the
  /// Manhattan frame if this observation qualifies.
  Pose initialize(const FrameObservation& obs, const Pose& pose);

  /// Throws kNoPrior before initialize().
  Pose propagate_pose() const;

  /// Throws kInsufficientObservations with fewer than two lines or two
  /// point correspondences.
  Pose track_frame(const FrameObservation& obs);

  const std::optional<ManhattanFrame>& manhattan_frame() const { return frame_; }
  const std::vector<FrameDiagnostics>& diagnostics() const { return diagnostics_; }
  const TrackerConfig& config() const { return config_; }

 private:
  struct Observed {
    std::vector<LineObservation> lines;  // after the length filter
    std::optional<RefinedVanishingPoints> refined;
    ObservedDirections directions;
  };

  Observed observe_directions(const FrameObservation& obs, FrameDiagnostics& diag) const;
  void try_anchor(const Observed& observed, const Rotation& rotation, int frame_index,
                  FrameDiagnostics& diag);
  void push_pose(const Pose& pose);

  CameraIntrinsics K_;
  TrackerConfig config_;
  std::optional<ManhattanFrame> frame_;
  std::optional<Pose> last_;
  std::optional<Pose> prev_;
  std::vector<FrameDiagnostics> diagnostics_;
};

struct SequenceResult {
  std::vector<Pose> trajectory;
  std::vector<FrameDiagnostics> diagnostics;
};

/// Tracks every observation in order. Frame 0 takes `initial_pose`
/// (identity by default). Errors are rethrown with the frame index in the
/// message.
SequenceResult run_sequence(std::span<const FrameObservation> observations, const CameraIntrinsics& K,
                            const TrackerConfig& config = {},
                            const std::optional<Pose>& initial_pose = std::nullopt);

}  // namespace vpslam
