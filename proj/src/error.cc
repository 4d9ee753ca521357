#include "logitaudit/error.h"

namespace logitaudit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPrompt: return "InvalidPrompt";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kInvalidDecision: return "InvalidDecision";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnsupportedScheme: return "UnsupportedScheme";
    case ErrorCode::kIndexError: return "IndexError";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kModeError: return "ModeError";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kCalibrationInfeasible: return "CalibrationInfeasible";
    case ErrorCode::kInsufficientTail: return "InsufficientTail";
    case ErrorCode::kBelowThreshold: return "BelowThreshold";
    case ErrorCode::kAuditUnavailable: return "AuditUnavailable";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kProbeError: return "ProbeError";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace logitaudit
