#include "vpslam/error.hpp"

namespace vpslam {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateSegment: return "degenerate segment";
    case ErrorCode::kBehindCamera: return "behind camera";
    case ErrorCode::kCoplanarNormals: return "coplanar normals";
    case ErrorCode::kInsufficientLines: return "insufficient lines";
    case ErrorCode::kEmptyGrid: return "empty grid";
    case ErrorCode::kDegenerateCluster: return "degenerate cluster";
    case ErrorCode::kNotFrameLike: return "not frame-like";
    case ErrorCode::kNoMatch: return "no match";
    case ErrorCode::kUnderconstrained: return "underconstrained";
    case ErrorCode::kInsufficientPoints: return "insufficient points";
    case ErrorCode::kRankDeficient: return "rank deficient";
    case ErrorCode::kNoConsensus: return "no consensus";
    case ErrorCode::kEmptyView: return "empty view";
    case ErrorCode::kNoPrior: return "no prior pose";
    case ErrorCode::kInsufficientObservations: return "insufficient observations";
    case ErrorCode::kInsufficientPairs: return "insufficient pairs";
    case ErrorCode::kCollinearDegenerate: return "collinear degenerate";
    case ErrorCode::kMalformedInput: return "malformed input";
    case ErrorCode::kNonIncreasingTimestamp: return "non-increasing timestamp";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kInvalidArgument: return "invalid argument";
  }
  return "unknown";
}

}  // namespace vpslam
