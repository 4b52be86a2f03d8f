#ifndef ASR_ERROR_H
#define ASR_ERROR_H

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace asr {

enum class ErrorCode {
  kUnknownLink,
  kEmptyPath,
  kInvalidPath,
  kInvalidGraph,
  kNoServerReachable,
  kMissingVariable,
  kNonPositiveValue,
  kDimensionMismatch,
  kNonPositivePerturbation,
  kNonPositiveMetric,
  kIncompleteAssignment,
  kInfeasible,
  kBudgetExceeded,
  kNegativeSample,
  kUninitialized,
  kInvalidBounds,
  kInvalidConfig,
  kParse,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this type; callers dispatch on
// code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised when no candidate assignment satisfies the constraints. Carries the
// labels of the constraints violated by the closest candidate.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& message,
                  std::vector<std::string> binding_constraints);

  const std::vector<std::string>& binding_constraints() const {
    return binding_;
  }

 private:
  std::vector<std::string> binding_;
};

}  // namespace asr

#endif
