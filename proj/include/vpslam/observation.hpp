#pragma once

#include <optional>
#include <vector>

#include "vpslam/geometry.hpp"
#include "vpslam/translation.hpp"

namespace vpslam {

/// Ground truth carried next to a synthetic observation for tests and
/// evaluation. The tracker never reads it.
struct FrameTruth {
  Pose pose;
  std::vector<int> line_axis;
  std::vector<bool> point_is_outlier;
};

/// Everything the front-end sees of one image.
struct FrameObservation {
  int frame_index = 0;
  double timestamp = 0.0;
  std::vector<LineObservation> lines;
  std::vector<PointCorrespondence> points;
  std::optional<FrameTruth> truth;
};

}  // namespace vpslam
