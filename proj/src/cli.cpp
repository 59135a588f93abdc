#include "vpslam/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "vpslam/error.hpp"
#include "vpslam/evaluation.hpp"
#include "vpslam/io.hpp"
#include "vpslam/synthworld.hpp"

namespace vpslam::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& scope) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::kMalformedInput, "config: unknown key '" + scope + key + "'");
    }
  }
}

struct SynthArgs {
  std::uint64_t seed = 0;
  int frames = 200;
  double noise_px = 0.0;
  double outlier_frac = 0.0;
  std::string style = "corridor";
  int segments_per_axis = 30;
  int points = 150;
  std::string out_dir;
};

struct TrackArgs {
  std::string obs_dir;
  std::string config;
  std::string out;
  std::string diagnostics;
};

struct EvalArgs {
  std::string est;
  std::string gt;
  std::string residuals;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  synth::SequenceConfig cfg;
  cfg.seed = a.seed;
  cfg.n_frames = a.frames;
  cfg.pixel_noise_sigma = a.noise_px;
  cfg.outlier_fraction = a.outlier_frac;
  cfg.style = a.style == "orbit" ? synth::TrajectoryStyle::kOrbit : synth::TrajectoryStyle::kCorridor;
  cfg.segments_per_axis = a.segments_per_axis;
  cfg.n_points = a.points;
  const synth::SyntheticSequence seq = synth::make_sequence(cfg);

  io::ObservationSet set;
  set.K = seq.K;
  set.image = seq.image;
  set.frame_rate = synth::kFrameRate;
  set.frames = seq.frames;
  const fs::path dir(a.out_dir);
  io::write_observations(dir, set);
  io::write_trajectory_file(dir / io::kGroundTruthFile, seq.ground_truth);
  out << "wrote " << seq.frames.size() << " frames to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_track(const TrackArgs& a, std::ostream& out) {
  TrackerConfig config;
  if (!a.config.empty()) {
    try {
      config = parse_tracker_config(io::read_text_file(a.config));
    } catch (const Error& e) {
      throw Error(e.code(), a.config + ": " + e.what());
    }
  }
  const io::ObservationSet set = io::read_observations(a.obs_dir);
  const SequenceResult result = run_sequence(set.frames, set.K, config);

  const fs::path traj_path(a.out);
  fs::path diag_path(a.diagnostics);
  if (diag_path.empty()) {
    diag_path = traj_path.parent_path() / (traj_path.stem().string() + "_diagnostics.csv");
  }
  io::write_trajectory_file(traj_path, result.trajectory);
  io::write_text_file(diag_path, diagnostics_csv(result.diagnostics));
  out << "tracked " << result.trajectory.size() << " frames -> " << traj_path.string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const std::vector<Pose> est = io::read_trajectory_file(a.est);
  const std::vector<Pose> gt = io::read_trajectory_file(a.gt);
  const AteResult ate = evaluate_ate(est, gt);
  out << "ate_rmse " << fixed6(ate.rmse) << "\n";
  out << "pairs " << ate.residuals.size() << "\n";
  out << "unmatched " << ate.unmatched << "\n";
  out << "scale " << fixed6(ate.alignment.scale) << "\n";
  if (!a.residuals.empty()) {
    std::string csv = "timestamp,residual_m\n";
    for (std::size_t i = 0; i < ate.residuals.size(); ++i) {
      csv += io::format_double(ate.timestamps[i]) + "," + io::format_double(ate.residuals[i]) + "\n";
    }
    io::write_text_file(a.residuals, csv);
  }
  return kExitOk;
}

}  // namespace

TrackerConfig parse_tracker_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedInput, "config: top level must be an object");

  TrackerConfig c;
  try {
    reject_unknown(doc,
                   {"seed", "min_length", "pair_cap", "tau_deg", "min_cluster_lines", "refine_passes",
                    "weight_by_length", "optimize_rotation", "refine_translation", "weight_by_line_count",
                    "verify_rotation", "guided_refinement", "lm", "ransac"},
                   "");
    if (doc.contains("seed")) {
      c.vp.accumulator.seed = doc["seed"].get<std::uint64_t>();
      c.ransac.seed = c.vp.accumulator.seed;
    }
    c.vp.min_length = doc.value("min_length", c.vp.min_length);
    c.vp.accumulator.pair_cap = doc.value("pair_cap", c.vp.accumulator.pair_cap);
    if (doc.contains("tau_deg")) c.refine.tau = doc["tau_deg"].get<double>() * kDeg;
    c.refine.min_cluster_lines = doc.value("min_cluster_lines", c.refine.min_cluster_lines);
    c.refine.passes = doc.value("refine_passes", c.refine.passes);
    c.refine.weight_by_length = doc.value("weight_by_length", c.refine.weight_by_length);
    c.optimize_rotation = doc.value("optimize_rotation", c.optimize_rotation);
    c.refine_translation = doc.value("refine_translation", c.refine_translation);
    c.weight_by_line_count = doc.value("weight_by_line_count", c.weight_by_line_count);
    c.verify_rotation = doc.value("verify_rotation", c.verify_rotation);
    c.guided_refinement = doc.value("guided_refinement", c.guided_refinement);
    if (doc.contains("lm")) {
      const json& lm = doc["lm"];
      reject_unknown(lm, {"initial_lambda", "max_iterations", "cost_tolerance", "step_tolerance"}, "lm.");
      c.lm.initial_lambda = lm.value("initial_lambda", c.lm.initial_lambda);
      c.lm.max_iterations = lm.value("max_iterations", c.lm.max_iterations);
      c.lm.cost_tolerance = lm.value("cost_tolerance", c.lm.cost_tolerance);
      c.lm.step_tolerance = lm.value("step_tolerance", c.lm.step_tolerance);
    }
    if (doc.contains("ransac")) {
      const json& r = doc["ransac"];
      reject_unknown(r, {"iterations", "threshold_px", "min_inliers"}, "ransac.");
      c.ransac.iterations = r.value("iterations", c.ransac.iterations);
      c.ransac.inlier_threshold_px = r.value("threshold_px", c.ransac.inlier_threshold_px);
      c.ransac.min_inliers = r.value("min_inliers", c.ransac.min_inliers);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("config: ") + e.what());
  }
  return c;
}

std::string diagnostics_csv(const std::vector<FrameDiagnostics>& rows) {
  std::string csv =
      "frame,timestamp,cluster_1,cluster_2,cluster_3,qualified_axes,matched_axes,"
      "cost_before,cost_after,lm_iterations,translation_inliers,flags\n";
  for (const FrameDiagnostics& d : rows) {
    csv += std::to_string(d.frame_index) + "," + io::format_double(d.timestamp) + "," +
           std::to_string(d.cluster_sizes[0]) + "," + std::to_string(d.cluster_sizes[1]) + "," +
           std::to_string(d.cluster_sizes[2]) + "," + std::to_string(d.qualified_axes) + "," +
           std::to_string(d.matched_axes) + "," + io::format_double(d.cost_before) + "," +
           io::format_double(d.cost_after) + "," + std::to_string(d.lm_iterations) + "," +
           std::to_string(d.translation_inliers) + "," + describe_flags(d.flags) + "\n";
  }
  return csv;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vanishing-point pose front-end: synthesize, track and evaluate sequences", "vpslam"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a synthetic Manhattan-world sequence");
  synth->add_option("--seed", synth_args.seed, "Random seed");
  synth->add_option("--frames", synth_args.frames, "Number of frames")->check(CLI::Range(2, 1000000));
  synth->add_option("--noise-px", synth_args.noise_px, "Pixel noise sigma")->check(CLI::NonNegativeNumber);
  synth->add_option("--outlier-frac", synth_args.outlier_frac, "Fraction of point outliers")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--style", synth_args.style, "Trajectory style")
      ->check(CLI::IsMember({"corridor", "orbit"}));
  synth->add_option("--segments-per-axis", synth_args.segments_per_axis)->check(CLI::PositiveNumber);
  synth->add_option("--points", synth_args.points)->check(CLI::PositiveNumber);
  synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();

  TrackArgs track_args;
  auto* track = app.add_subcommand("track", "Track an observation directory");
  track->add_option("--obs-dir", track_args.obs_dir, "Observation directory")->required();
  track->add_option("--config", track_args.config, "JSON tracker configuration");
  track->add_option("--out", track_args.out, "Output TUM trajectory")->required();
  track->add_option("--diagnostics", track_args.diagnostics, "Per-frame diagnostics CSV");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "ATE RMSE after 7-DoF alignment");
  eval->add_option("--est", eval_args.est, "Estimated TUM trajectory")->required();
  eval->add_option("--gt", eval_args.gt, "Ground-truth TUM trajectory")->required();
  eval->add_option("--residuals", eval_args.residuals, "Write per-frame residual CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args, out);
    if (track->parsed()) return cmd_track(track_args, out);
    return cmd_eval(eval_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace vpslam::cli
