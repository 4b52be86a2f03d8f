#include "asr/error.h"

#include <utility>

namespace asr {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownLink:
      return "UnknownLink";
    case ErrorCode::kEmptyPath:
      return "EmptyPath";
    case ErrorCode::kInvalidPath:
      return "InvalidPath";
    case ErrorCode::kInvalidGraph:
      return "InvalidGraph";
    case ErrorCode::kNoServerReachable:
      return "NoServerReachable";
    case ErrorCode::kMissingVariable:
      return "MissingVariable";
    case ErrorCode::kNonPositiveValue:
      return "NonPositiveValue";
    case ErrorCode::kDimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::kNonPositivePerturbation:
      return "NonPositivePerturbation";
    case ErrorCode::kNonPositiveMetric:
      return "NonPositiveMetric";
    case ErrorCode::kIncompleteAssignment:
      return "IncompleteAssignment";
    case ErrorCode::kInfeasible:
      return "Infeasible";
    case ErrorCode::kBudgetExceeded:
      return "BudgetExceeded";
    case ErrorCode::kNegativeSample:
      return "NegativeSample";
    case ErrorCode::kUninitialized:
      return "Uninitialized";
    case ErrorCode::kInvalidBounds:
      return "InvalidBounds";
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kParse:
      return "Parse";
    case ErrorCode::kIo:
      return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

InfeasibleError::InfeasibleError(const std::string& message,
                                 std::vector<std::string> binding_constraints)
    : Error(ErrorCode::kInfeasible, message),
      binding_(std::move(binding_constraints)) {}

}  // namespace asr
