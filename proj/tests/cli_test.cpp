#include <algorithm>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vpslam/cli.hpp"
#include "vpslam/error.hpp"
#include "vpslam/io.hpp"

namespace vpslam {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "vpslam");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vpslam_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double printed_rmse(const std::string& out) {
  std::istringstream in(out);
  std::string key;
  double value = -1.0;
  while (in >> key) {
    if (key == "ate_rmse") {
      in >> value;
      break;
    }
  }
  return value;
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"track", "--out", "x.txt"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"synth", "--out-dir", "d", "--frames", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, MissingIntrinsicsExitTwo) {
  const fs::path dir = scratch_dir("missing");
  const CliRun r = run({"track", "--obs-dir", dir.string(), "--out", (dir / "t.txt").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("intrinsics.txt"), std::string::npos) << r.err;
}

TEST(Cli, EvalOfIdenticalFilesPrintsZero) {
  const fs::path dir = scratch_dir("eval");
  ASSERT_EQ(run({"synth", "--seed", "1", "--frames", "20", "--out-dir", dir.string()}).code, cli::kExitOk);
  const std::string gt = (dir / io::kGroundTruthFile).string();
  const CliRun r = run({"eval", "--est", gt, "--gt", gt, "--residuals", (dir / "res.csv").string()});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("ate_rmse 0.000000\n"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "res.csv"));
}

TEST(Cli, EvalMalformedTrajectoryNamesLine) {
  const fs::path dir = scratch_dir("badtraj");
  io::write_text_file(dir / "bad.txt", "0 0 0 0 0 0 0 1\n1 0 0\n");
  const CliRun r = run({"eval", "--est", (dir / "bad.txt").string(), "--gt", (dir / "bad.txt").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("bad.txt:2"), std::string::npos) << r.err;
}

TEST(Cli, NoiseFreeEndToEnd) {
  const fs::path dir = scratch_dir("e2e");
  ASSERT_EQ(run({"synth", "--seed", "3", "--frames", "60", "--out-dir", dir.string()}).code, cli::kExitOk);
  const fs::path traj = dir / "est.txt";
  const CliRun t = run({"track", "--obs-dir", dir.string(), "--out", traj.string()});
  ASSERT_EQ(t.code, cli::kExitOk) << t.err;
  EXPECT_TRUE(fs::exists(dir / "est_diagnostics.csv"));
  const CliRun e = run({"eval", "--est", traj.string(), "--gt", (dir / io::kGroundTruthFile).string()});
  ASSERT_EQ(e.code, cli::kExitOk) << e.err;
  const double rmse = printed_rmse(e.out);
  EXPECT_GE(rmse, 0.0);
  EXPECT_LT(rmse, 1e-3);
}

TEST(Cli, BadConfigExitTwo) {
  const fs::path dir = scratch_dir("badcfg");
  ASSERT_EQ(run({"synth", "--frames", "3", "--out-dir", dir.string()}).code, cli::kExitOk);
  io::write_text_file(dir / "cfg.json", R"({"no_such_key": 1})");
  const CliRun r = run({"track", "--obs-dir", dir.string(), "--config", (dir / "cfg.json").string(), "--out",
                     (dir / "t.txt").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("cfg.json"), std::string::npos) << r.err;
}

TEST(TrackerConfigJson, KeysApplied) {
  const TrackerConfig c = cli::parse_tracker_config(
      R"({"tau_deg": 3.0, "optimize_rotation": false, "min_cluster_lines": 7,
          "lm": {"max_iterations": 11}, "ransac": {"iterations": 50, "threshold_px": 1.5}})");
  EXPECT_NEAR(c.refine.tau, 3.0 * testing::kDeg, 1e-15);
  EXPECT_FALSE(c.optimize_rotation);
  EXPECT_EQ(c.refine.min_cluster_lines, 7);
  EXPECT_EQ(c.lm.max_iterations, 11);
  EXPECT_EQ(c.ransac.iterations, 50);
  EXPECT_EQ(c.ransac.inlier_threshold_px, 1.5);
  EXPECT_TRUE(c.refine_translation);
}

TEST(TrackerConfigJson, RejectsUnknownAndInvalid) {
  const auto code = [](const std::string& text) {
    try {
      cli::parse_tracker_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code(R"({"lm": {"bogus": 1}})"), ErrorCode::kMalformedInput);
  EXPECT_EQ(code("{not json"), ErrorCode::kMalformedInput);
  EXPECT_EQ(code(R"({"tau_deg": "wide"})"), ErrorCode::kMalformedInput);
}

TEST(DiagnosticsCsv, OneRowPerFrame) {
  std::vector<FrameDiagnostics> rows(3);
  rows[1].flags = kFlagVpDetectionFailed;
  const std::string csv = cli::diagnostics_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("vp_failed"), std::string::npos);
}

}  // namespace
}  // namespace vpslam
