#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vpslam/pipeline.hpp"

namespace vpslam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Tracker settings from a JSON document. Angles are in degrees. Unknown
/// keys throw kMalformedInput.
TrackerConfig parse_tracker_config(const std::string& json_text);

std::string diagnostics_csv(const std::vector<FrameDiagnostics>& rows);

}  // namespace vpslam::cli
