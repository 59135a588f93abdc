#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vpslam/geometry.hpp"

namespace vpslam {

// Latitude/longitude accumulator over the z >= 0 half of the Gaussian sphere,
// one cell per degree.
class PolarGrid {
 public:
  static constexpr int kLatCells = 90;
  static constexpr int kLonCells = 360;

  PolarGrid() : cells_(static_cast<std::size_t>(kLatCells) * kLonCells, 0.0) {}

  double at(int lat, int lon) const { return cells_[index(lat, lon)]; }
  void add(int lat, int lon, double score);

  PolarGrid& operator+=(const PolarGrid& other);

  bool empty() const;
  double total() const;
  std::span<const double> cells() const { return cells_; }

 private:
  static std::size_t index(int lat, int lon) {
    return static_cast<std::size_t>(lat) * kLonCells + static_cast<std::size_t>(lon);
  }

  std::vector<double> cells_;
};

struct PolarCell {
  int lat = 0;
  int lon = 0;

  bool operator==(const PolarCell&) const = default;
};

/// Intersection of two great circles, hemisphere-canonical.
/// Throws kCoplanarNormals when |s1 x s2| <= 1e-9.
Eigen::Vector3d pair_vp_candidate(const Eigen::Vector3d& s1, const Eigen::Vector3d& s2);

/// Cell holding a hemisphere-canonical unit direction. The pole row is
/// clamped into lat 89.
PolarCell polar_cell(const Eigen::Vector3d& v);

/// Unit direction through the middle of a cell.
Eigen::Vector3d cell_center_direction(const PolarCell& cell);

/// len0 * len1 * sin(2 theta), clamped below at zero.
double pair_score(double len0, double len1, double theta);

/// Same score from the segments' direction vectors; used by the
/// accumulator.
double pair_score(const LineObservation& a, const LineObservation& b);

/// Acute angle in [0, pi/2] between the image directions of two segments.
double segment_angle(const LineObservation& a, const LineObservation& b);

struct AccumulatorConfig {
  std::size_t pair_cap = 20000;
  std::uint64_t seed = 0;
};

using LinePair = std::pair<std::uint32_t, std::uint32_t>;

/// All i < j pairs over n lines in lexicographic order, or a seeded uniform
/// subset of exactly `pair_cap` of them (still sorted) when there are more.
std::vector<LinePair> select_pairs(std::size_t n, std::size_t pair_cap, std::uint64_t seed);

/// Adds the contribution of each listed pair to `grid`.
void accumulate_pairs(std::span<const LineObservation> lines, std::span<const LinePair> pairs,
                      PolarGrid& grid);

/// Throws kInsufficientLines for fewer than two lines.
PolarGrid build_accumulator(std::span<const LineObservation> lines, const AccumulatorConfig& config);

struct VanishingPointSet {
  std::array<Eigen::Vector3d, 3> directions;
  std::array<double, 3> cell_scores{};
  double total_score = 0.0;
  /// Homogeneous image points K * direction.
  std::array<Eigen::Vector3d, 3> pixel_vps;
};

struct TripletSearchConfig {
  /// v1 is tried at an n x n lattice of positions inside the strongest cell;
  /// 1 uses the cell center only.
  int v1_subdivisions = 5;
  /// Evenly spaced v2 candidates on the great circle perpendicular to v1.
  int v2_candidates = 3600;
};

/// Exhaustive orthogonal-triplet search seeded at the strongest cell.
/// Score of a triplet = sum of the three cell scores; ties go to the
/// smallest v2 longitude index. Output is Gram-Schmidt orthonormalized
/// from v1 and hemisphere-canonical. Throws kEmptyGrid when no cell is
/// positive.
VanishingPointSet search_orthogonal_triplet(const PolarGrid& grid, const CameraIntrinsics& K,
                                            const TripletSearchConfig& config = {});

/// Label assigned to lines that fit none of the three directions.
inline constexpr int kUnassigned = -1;

/// Per-line index 0..2 of the closest direction (by |s . d|), or kUnassigned
/// when even the closest exceeds sin(tau).
std::vector<int> cluster_lines(std::span<const LineObservation> lines,
                               const std::array<Eigen::Vector3d, 3>& directions, double tau);

struct VpDetectorConfig {
  double min_length = 15.0;
  AccumulatorConfig accumulator;
  TripletSearchConfig triplet;
};

/// Length filter, accumulator and triplet search in one call. Throws
/// kInsufficientLines when fewer than two segments survive the filter.
VanishingPointSet detect_vanishing_points(std::span<const LineObservation> lines,
                                          const CameraIntrinsics& K,
                                          const VpDetectorConfig& config = {});

}  // namespace vpslam
