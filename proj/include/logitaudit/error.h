#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logitaudit {

enum class ErrorCode {
  kInvalidPrompt,
  kShapeError,
  kInvalidK,
  kInvalidDecision,
  kAlignmentError,
  kInvalidArgument,
  kUnsupportedScheme,
  kIndexError,
  kTooLarge,
  kModeError,
  kEmptyTrace,
  kCalibrationInfeasible,
  kInsufficientTail,
  kBelowThreshold,
  kAuditUnavailable,
  kDuplicateId,
  kProbeError,
  kInfeasible,
  kParseError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by aligned re-execution; remembers the offending step.
class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t step, const std::string& what)
      : Error(ErrorCode::kAlignmentError,
              "step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace logitaudit
