#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdrci {

enum class ErrorCode {
  kShapeMismatch,
  kUnbounded,
  kInfeasible,
  kDegenerate,
  kNotConverged,
  kEmptyResult,
  kNonSimpleSeed,
  kSingularBlock,
  kUnboundedSeed,
  kConfigurationViolated,
  kInvalidMultiplier,
  kSolverInfeasible,
  kSolverNumericalFailure,
  kInfeasibleAtInit,
  kSingularW,
  kOutsideSet,
  kQpInfeasible,
  kDegenerateSlice,
  kInvalidInput,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kEmptyResult: return "EmptyResult";
    case ErrorCode::kNonSimpleSeed: return "NonSimpleSeed";
    case ErrorCode::kSingularBlock: return "SingularBlock";
    case ErrorCode::kUnboundedSeed: return "UnboundedSeed";
    case ErrorCode::kConfigurationViolated: return "ConfigurationViolated";
    case ErrorCode::kInvalidMultiplier: return "InvalidMultiplier";
    case ErrorCode::kSolverInfeasible: return "SolverInfeasible";
    case ErrorCode::kSolverNumericalFailure: return "SolverNumericalFailure";
    case ErrorCode::kInfeasibleAtInit: return "InfeasibleAtInit";
    case ErrorCode::kSingularW: return "SingularW";
    case ErrorCode::kOutsideSet: return "OutsideSet";
    case ErrorCode::kQpInfeasible: return "QPInfeasible";
    case ErrorCode::kDegenerateSlice: return "DegenerateSlice";
    case ErrorCode::kInvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace pdrci
