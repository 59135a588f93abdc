#include "vpslam/vp_detect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

#include "vpslam/error.hpp"

namespace vpslam {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

void PolarGrid::add(int lat, int lon, double score) {
  if (lat < 0 || lat >= kLatCells || lon < 0 || lon >= kLonCells) {
    throw Error(ErrorCode::kInvalidArgument, "polar cell out of range");
  }
  if (!(score >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "polar grid scores must be non-negative");
  }
  cells_[index(lat, lon)] += score;
}

PolarGrid& PolarGrid::operator+=(const PolarGrid& other) {
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  return *this;
}

bool PolarGrid::empty() const {
  return std::none_of(cells_.begin(), cells_.end(), [](double c) { return c > 0.0; });
}

double PolarGrid::total() const {
  double sum = 0.0;
  for (double c : cells_) sum += c;
  return sum;
}

Eigen::Vector3d pair_vp_candidate(const Eigen::Vector3d& s1, const Eigen::Vector3d& s2) {
  const Eigen::Vector3d v = s1.cross(s2);
  const double n = v.norm();
  if (!(n > 1e-9)) {
    throw Error(ErrorCode::kCoplanarNormals, "great circles coincide");
  }
  return canonical_hemisphere(v / n);
}

PolarCell polar_cell(const Eigen::Vector3d& v) {
  const double lat_deg = std::asin(std::clamp(v.z(), -1.0, 1.0)) / kDeg;
  double lon = std::atan2(v.y(), v.x());
  if (lon < 0.0) lon += 2.0 * std::numbers::pi;
  const int lat = std::clamp(static_cast<int>(std::floor(lat_deg)), 0, PolarGrid::kLatCells - 1);
  // lon can round up to exactly 360 degrees for tiny negative angles.
  const int lon_idx = std::clamp(static_cast<int>(std::floor(lon / kDeg)), 0, PolarGrid::kLonCells - 1);
  return {lat, lon_idx};
}

Eigen::Vector3d cell_center_direction(const PolarCell& cell) {
  const double lat = (cell.lat + 0.5) * kDeg;
  const double lon = (cell.lon + 0.5) * kDeg;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

double pair_score(double len0, double len1, double theta) {
  return std::max(0.0, len0 * len1 * std::sin(2.0 * theta));
}

double pair_score(const LineObservation& a, const LineObservation& b) {
  // len0 len1 sin(2 theta) = 2 |cross| |dot| / (len0 len1), exactly zero for
  // parallel or perpendicular direction vectors.
  const Eigen::Vector2d da = a.ep - a.sp;
  const Eigen::Vector2d db = b.ep - b.sp;
  const double denom = da.norm() * db.norm();
  if (!(denom > 0.0)) return 0.0;
  const double cross = da.x() * db.y() - da.y() * db.x();
  return 2.0 * std::abs(cross) * std::abs(da.dot(db)) / denom;
}

double segment_angle(const LineObservation& a, const LineObservation& b) {
  const Eigen::Vector2d da = a.ep - a.sp;
  const Eigen::Vector2d db = b.ep - b.sp;
  const double cross = da.x() * db.y() - da.y() * db.x();
  return std::atan2(std::abs(cross), std::abs(da.dot(db)));
}

std::vector<LinePair> select_pairs(std::size_t n, std::size_t pair_cap, std::uint64_t seed) {
  std::vector<LinePair> pairs;
  if (n < 2) return pairs;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;

  if (total <= pair_cap) {
    pairs.reserve(total);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
    }
    return pairs;
  }

  // Floyd's sampling of pair_cap distinct linear indices.
  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(pair_cap * 2);
  for (std::uint64_t j = total - pair_cap; j < total; ++j) {
    std::uniform_int_distribution<std::uint64_t> draw(0, j);
    const std::uint64_t t = draw(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> linear(chosen.begin(), chosen.end());
  std::sort(linear.begin(), linear.end());

  pairs.reserve(linear.size());
  std::size_t row = 0;
  std::uint64_t row_begin = 0;
  for (std::uint64_t k : linear) {
    while (k >= row_begin + (n - 1 - row)) {
      row_begin += n - 1 - row;
      ++row;
    }
    const std::uint64_t col = row + 1 + (k - row_begin);
    pairs.emplace_back(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col));
  }
  return pairs;
}

void accumulate_pairs(std::span<const LineObservation> lines, std::span<const LinePair> pairs,
                      PolarGrid& grid) {
  for (const auto& [i, j] : pairs) {
    const LineObservation& a = lines[i];
    const LineObservation& b = lines[j];
    const double score = pair_score(a, b);
    if (score <= 0.0) continue;
    const Eigen::Vector3d cross = a.s.cross(b.s);
    if (!(cross.norm() > 1e-9)) continue;
    const PolarCell cell = polar_cell(canonical_hemisphere(cross.normalized()));
    grid.add(cell.lat, cell.lon, score);
  }
}

PolarGrid build_accumulator(std::span<const LineObservation> lines, const AccumulatorConfig& config) {
  if (lines.size() < 2) {
    throw Error(ErrorCode::kInsufficientLines, "the accumulator needs at least two lines");
  }
  PolarGrid grid;
  const std::vector<LinePair> pairs = select_pairs(lines.size(), config.pair_cap, config.seed);
  accumulate_pairs(lines, pairs, grid);
  return grid;
}

VanishingPointSet search_orthogonal_triplet(const PolarGrid& grid, const CameraIntrinsics& K,
                                            const TripletSearchConfig& config) {
  if (config.v1_subdivisions < 1 || config.v2_candidates < 1) {
    throw Error(ErrorCode::kInvalidArgument, "triplet search needs positive sampling counts");
  }
  PolarCell best_cell;
  double best_score = 0.0;
  for (int lat = 0; lat < PolarGrid::kLatCells; ++lat) {
    for (int lon = 0; lon < PolarGrid::kLonCells; ++lon) {
      if (grid.at(lat, lon) > best_score) {
        best_score = grid.at(lat, lon);
        best_cell = {lat, lon};
      }
    }
  }
  if (!(best_score > 0.0)) {
    throw Error(ErrorCode::kEmptyGrid, "polar grid has no positive cell");
  }

  Eigen::Vector3d best_v1 = cell_center_direction(best_cell);
  Eigen::Vector3d best_v2 = Eigen::Vector3d::Zero();
  double best_total = -1.0;
  int best_lon = PolarGrid::kLonCells;
  std::array<double, 3> best_scores{};

  const int n = config.v1_subdivisions;
  for (int a_lat = 0; a_lat < n; ++a_lat) {
    for (int a_lon = 0; a_lon < n; ++a_lon) {
      const double lat = (best_cell.lat + (a_lat + 0.5) / n) * kDeg;
      const double lon = (best_cell.lon + (a_lon + 0.5) / n) * kDeg;
      const Eigen::Vector3d v1(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
      Eigen::Index least = 0;
      v1.cwiseAbs().minCoeff(&least);
      const Eigen::Vector3d a = v1.cross(Eigen::Vector3d::Unit(least)).normalized();
      const Eigen::Vector3d b = v1.cross(a);

      for (int i = 0; i < config.v2_candidates; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / config.v2_candidates;
        const Eigen::Vector3d v2 = canonical_hemisphere(std::cos(phi) * a + std::sin(phi) * b);
        const Eigen::Vector3d v3 = canonical_hemisphere(v1.cross(v2));
        const PolarCell c2 = polar_cell(v2);
        const PolarCell c3 = polar_cell(v3);
        const double s2 = grid.at(c2.lat, c2.lon);
        const double s3 = grid.at(c3.lat, c3.lon);
        const double total = best_score + s2 + s3;
        if (total > best_total || (total == best_total && c2.lon < best_lon)) {
          best_total = total;
          best_lon = c2.lon;
          best_v1 = v1;
          best_v2 = v2;
          best_scores = {best_score, s2, s3};
        }
      }
    }
  }

  VanishingPointSet vps;
  const Eigen::Vector3d d1 = best_v1.normalized();
  const Eigen::Vector3d d2 = (best_v2 - best_v2.dot(d1) * d1).normalized();
  const Eigen::Vector3d d3 = d1.cross(d2);
  vps.directions = {canonical_hemisphere(d1), canonical_hemisphere(d2), canonical_hemisphere(d3)};
  vps.cell_scores = best_scores;
  vps.total_score = best_total;
  const Eigen::Matrix3d k = K.matrix();
  for (int i = 0; i < 3; ++i) vps.pixel_vps[i] = k * vps.directions[i];
  return vps;
}

std::vector<int> cluster_lines(std::span<const LineObservation> lines,
                               const std::array<Eigen::Vector3d, 3>& directions, double tau) {
  const double gate = std::sin(tau);
  std::vector<int> labels(lines.size(), kUnassigned);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    int best = 0;
    double best_dot = std::abs(lines[i].s.dot(directions[0]));
    for (int k = 1; k < 3; ++k) {
      const double d = std::abs(lines[i].s.dot(directions[k]));
      if (d < best_dot) {
        best_dot = d;
        best = k;
      }
    }
    if (best_dot <= gate) labels[i] = best;
  }
  return labels;
}

VanishingPointSet detect_vanishing_points(std::span<const LineObservation> lines,
                                          const CameraIntrinsics& K, const VpDetectorConfig& config) {
  std::vector<LineObservation> kept;
  kept.reserve(lines.size());
  for (const auto& line : lines) {
    if (line.length >= config.min_length) kept.push_back(line);
  }
  const PolarGrid grid = build_accumulator(kept, config.accumulator);
  return search_orthogonal_triplet(grid, K, config.triplet);
}

}  // namespace vpslam
