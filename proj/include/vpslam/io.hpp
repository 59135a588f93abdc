#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vpslam/geometry.hpp"
#include "vpslam/observation.hpp"

namespace vpslam::io {

// Trajectories use the 8-column TUM layout
//   timestamp tx ty tz qx qy qz qw
// where (t, q) place the camera in the world (camera-to-world). Poses in
// memory are world-to-camera, so reading and writing invert them.

/// Throws kMalformedInput naming the line, or kNonIncreasingTimestamp.
std::vector<Pose> parse_trajectory(std::string_view text, std::string_view source = "<trajectory>");
std::string write_trajectory(const std::vector<Pose>& poses);

std::vector<Pose> read_trajectory_file(const std::filesystem::path& path);
void write_trajectory_file(const std::filesystem::path& path, const std::vector<Pose>& poses);

// Observation directory layout:
//   intrinsics.txt   "key value" lines: fx fy cx cy width height [frame_rate]
//   lines.txt        frame x1 y1 x2 y2           (pixels)
//   points.txt       frame u v X Y Z             (pixels, meters)
// All files accept '#' comments and blank lines.
inline constexpr const char* kIntrinsicsFile = "intrinsics.txt";
inline constexpr const char* kLinesFile = "lines.txt";
inline constexpr const char* kPointsFile = "points.txt";
inline constexpr const char* kGroundTruthFile = "groundtruth.txt";

struct ObservationSet {
  CameraIntrinsics K;
  ImageSize image;
  double frame_rate = 30.0;
  /// Sorted by frame index; timestamps are frame_index / frame_rate.
  std::vector<FrameObservation> frames;
};

struct IntrinsicsRecord {
  CameraIntrinsics K;
  ImageSize image;
  double frame_rate = 30.0;
};

IntrinsicsRecord parse_intrinsics(std::string_view text, std::string_view source = kIntrinsicsFile);
std::string write_intrinsics(const IntrinsicsRecord& record);

/// Reads the three observation files from `dir`. Missing files and bad
/// records throw Error with the file (and line) in the message.
ObservationSet read_observations(const std::filesystem::path& dir);
void write_observations(const std::filesystem::path& dir, const ObservationSet& set);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal string that reads back to exactly the same double.
std::string format_double(double value);

}  // namespace vpslam::io
