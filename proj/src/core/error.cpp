#include "t2mx/core/error.hpp"

namespace t2mx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidRotation: return "invalid-rotation";
    case ErrorCode::kDegenerate6D: return "degenerate-6d";
    case ErrorCode::kTooShort: return "too-short";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kInvalidCutoff: return "invalid-cutoff";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kNoData: return "no-data";
    case ErrorCode::kInvalidToken: return "invalid-token";
    case ErrorCode::kLength: return "length";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kContract: return "contract-violation";
    case ErrorCode::kInvalidDistribution: return "invalid-distribution";
    case ErrorCode::kDegenerateBatch: return "degenerate-batch";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kMissingDependency: return "missing-dependency";
    case ErrorCode::kMissingSplit: return "missing-split";
    case ErrorCode::kEmptyText: return "empty-text";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace t2mx
