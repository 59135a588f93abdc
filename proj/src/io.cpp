#include "vpslam/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vpslam/error.hpp"

namespace vpslam::io {

namespace {

std::string where(std::string_view source, std::size_t line_no) {
  std::ostringstream out;
  out << source << ":" << line_no << ": ";
  return out.str();
}

[[noreturn]] void malformed(std::string_view source, std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kMalformedInput, where(source, line_no) + what);
}

/// Fields of one line with any '#' comment removed.
std::vector<std::string_view> tokenize(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    const std::vector<std::string_view> fields = tokenize(line);
    if (!fields.empty()) fn(line_no, fields);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

bool parse_number(std::string_view field, double& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(out);
}

bool parse_number(std::string_view field, int& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

template <typename T>
T field_as(std::string_view field, std::string_view source, std::size_t line_no) {
  T value{};
  if (!parse_number(field, value)) {
    malformed(source, line_no, "cannot parse '" + std::string(field) + "' as a number");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw Error(ErrorCode::kIo, "failed writing " + path.string());
  }
}

std::vector<Pose> parse_trajectory(std::string_view text, std::string_view source) {
  std::vector<Pose> poses;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 8) {
      malformed(source, line_no, "expected 8 fields, found " + std::to_string(f.size()));
    }
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = field_as<double>(f[i], source, line_no);
    if (!poses.empty() && !(v[0] > poses.back().timestamp)) {
      throw Error(ErrorCode::kNonIncreasingTimestamp,
                  where(source, line_no) + "timestamps must be strictly increasing");
    }
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (!(q.norm() > 1e-12)) malformed(source, line_no, "zero quaternion");
    const Rotation r_wc = Rotation::from_quaternion(q);
    const Eigen::Vector3d center(v[1], v[2], v[3]);
    const Rotation r_cw = r_wc.inverse();
    poses.push_back({r_cw, -(r_cw * center), v[0]});
  });
  return poses;
}

std::string write_trajectory(const std::vector<Pose>& poses) {
  std::string out = "# timestamp tx ty tz qx qy qz qw\n";
  for (const Pose& p : poses) {
    const Eigen::Vector3d c = p.camera_center();
    const Eigen::Quaterniond q = p.rotation.inverse().quaternion();
    const double v[8] = {p.timestamp, c.x(), c.y(), c.z(), q.x(), q.y(), q.z(), q.w()};
    for (int i = 0; i < 8; ++i) {
      if (i > 0) out += ' ';
      out += format_double(v[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<Pose> read_trajectory_file(const std::filesystem::path& path) {
  return parse_trajectory(read_text_file(path), path.string());
}

void write_trajectory_file(const std::filesystem::path& path, const std::vector<Pose>& poses) {
  write_text_file(path, write_trajectory(poses));
}

IntrinsicsRecord parse_intrinsics(std::string_view text, std::string_view source) {
  std::map<std::string, double, std::less<>> values;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 2) malformed(source, line_no, "expected 'key value'");
    static const std::set<std::string, std::less<>> kKeys = {"fx", "fy", "cx", "cy",
                                                             "width", "height", "frame_rate"};
    if (!kKeys.contains(f[0])) malformed(source, line_no, "unknown key '" + std::string(f[0]) + "'");
    if (values.contains(f[0])) malformed(source, line_no, "duplicate key '" + std::string(f[0]) + "'");
    values.emplace(std::string(f[0]), field_as<double>(f[1], source, line_no));
  });
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"}) {
    if (!values.contains(key)) {
      throw Error(ErrorCode::kMalformedInput, std::string(source) + ": missing key '" + key + "'");
    }
  }
  IntrinsicsRecord rec;
  rec.K = {values["fx"], values["fy"], values["cx"], values["cy"]};
  rec.image = {static_cast<int>(values["width"]), static_cast<int>(values["height"])};
  if (values.contains("frame_rate")) rec.frame_rate = values["frame_rate"];
  try {
    rec.K.validate(rec.image.width, rec.image.height);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedInput, std::string(source) + ": " + e.what());
  }
  if (!(rec.frame_rate > 0.0)) {
    throw Error(ErrorCode::kMalformedInput, std::string(source) + ": frame_rate must be positive");
  }
  return rec;
}

std::string write_intrinsics(const IntrinsicsRecord& record) {
  std::string out;
  auto kv = [&](const char* key, double value) {
    out += key;
    out += ' ';
    out += format_double(value);
    out += '\n';
  };
  kv("fx", record.K.fx);
  kv("fy", record.K.fy);
  kv("cx", record.K.cx);
  kv("cy", record.K.cy);
  kv("width", record.image.width);
  kv("height", record.image.height);
  kv("frame_rate", record.frame_rate);
  return out;
}

ObservationSet read_observations(const std::filesystem::path& dir) {
  const std::filesystem::path intr_path = dir / kIntrinsicsFile;
  const std::filesystem::path lines_path = dir / kLinesFile;
  const std::filesystem::path points_path = dir / kPointsFile;

  const IntrinsicsRecord rec = parse_intrinsics(read_text_file(intr_path), intr_path.string());
  ObservationSet set;
  set.K = rec.K;
  set.image = rec.image;
  set.frame_rate = rec.frame_rate;

  std::map<int, FrameObservation> frames;
  auto frame_at = [&](int idx, std::string_view source, std::size_t line_no) -> FrameObservation& {
    if (idx < 0) malformed(source, line_no, "negative frame index");
    FrameObservation& obs = frames[idx];
    obs.frame_index = idx;
    obs.timestamp = idx / set.frame_rate;
    return obs;
  };

  const std::string lines_src = lines_path.string();
  for_each_record(read_text_file(lines_path), [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 5) malformed(lines_src, line_no, "expected 5 fields, found " + std::to_string(f.size()));
    const int idx = field_as<int>(f[0], lines_src, line_no);
    const Eigen::Vector2d sp(field_as<double>(f[1], lines_src, line_no), field_as<double>(f[2], lines_src, line_no));
    const Eigen::Vector2d ep(field_as<double>(f[3], lines_src, line_no), field_as<double>(f[4], lines_src, line_no));
    FrameObservation& obs = frame_at(idx, lines_src, line_no);
    try {
      obs.lines.push_back(make_line_observation(sp, ep, set.K));
    } catch (const Error& e) {
      malformed(lines_src, line_no, e.what());
    }
  });

  const std::string points_src = points_path.string();
  for_each_record(read_text_file(points_path), [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    if (f.size() != 6) malformed(points_src, line_no, "expected 6 fields, found " + std::to_string(f.size()));
    const int idx = field_as<int>(f[0], points_src, line_no);
    PointCorrespondence pc;
    pc.x = {field_as<double>(f[1], points_src, line_no), field_as<double>(f[2], points_src, line_no)};
    pc.X = {field_as<double>(f[3], points_src, line_no), field_as<double>(f[4], points_src, line_no),
            field_as<double>(f[5], points_src, line_no)};
    frame_at(idx, points_src, line_no).points.push_back(pc);
  });

  for (auto& [idx, obs] : frames) set.frames.push_back(std::move(obs));
  return set;
}

void write_observations(const std::filesystem::path& dir, const ObservationSet& set) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / kIntrinsicsFile, write_intrinsics({set.K, set.image, set.frame_rate}));

  std::string lines = "# frame x1 y1 x2 y2\n";
  std::string points = "# frame u v X Y Z\n";
  for (const FrameObservation& obs : set.frames) {
    const std::string idx = std::to_string(obs.frame_index);
    for (const LineObservation& l : obs.lines) {
      lines += idx;
      for (double v : {l.sp.x(), l.sp.y(), l.ep.x(), l.ep.y()}) {
        lines += ' ';
        lines += format_double(v);
      }
      lines += '\n';
    }
    for (const PointCorrespondence& p : obs.points) {
      points += idx;
      for (double v : {p.x.x(), p.x.y(), p.X.x(), p.X.y(), p.X.z()}) {
        points += ' ';
        points += format_double(v);
      }
      points += '\n';
    }
  }
  write_text_file(dir / kLinesFile, lines);
  write_text_file(dir / kPointsFile, points);
}

}  // namespace vpslam::io
