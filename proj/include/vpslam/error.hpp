#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpslam {

enum class ErrorCode {
  kDegenerateSegment,
  kBehindCamera,
  kCoplanarNormals,
  kInsufficientLines,
  kEmptyGrid,
  kDegenerateCluster,
  kNotFrameLike,
  kNoMatch,
  kUnderconstrained,
  kInsufficientPoints,
  kRankDeficient,
  kNoConsensus,
  kEmptyView,
  kNoPrior,
  kInsufficientObservations,
  kInsufficientPairs,
  kCollinearDegenerate,
  kMalformedInput,
  kNonIncreasingTimestamp,
  kIo,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vpslam
