#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace t2mx {

// Failure categories surfaced by every module. The CLI maps a few of them to
// stable exit codes.
enum class ErrorCode {
  kInvalidRotation,
  kDegenerate6D,
  kTooShort,
  kShape,
  kInvalidCutoff,
  kUnsupported,
  kInvalidSpec,
  kNoData,
  kInvalidToken,
  kLength,
  kConfig,
  kContract,
  kInvalidDistribution,
  kDegenerateBatch,
  kAlignment,
  kMalformed,
  kMissingDependency,
  kMissingSplit,
  kEmptyText,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace t2mx
