#pragma once

#include <stdexcept>
#include <string>

namespace lbw {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kCountMismatch,
  kNonConvergence,
  kDegenerateMatrix,
  kNotSpd,
  kInsufficientData,
  kEmptyComponent,
  kNonFiniteInput,
  kNonFiniteCost,
  kUnknownGroup,
  kProvenanceMismatch,
  kSingleGroup,
  kSingleClass,
  kEmptyMask,
  kBothEmpty,
  kIo,
};

/// Exception carrying a machine-readable code so the C API can map failures
/// to error codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lbw
