#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hbrd {

enum class ErrorCode {
  DimensionMismatch,
  NotPositiveDefinite,
  OrderingViolated,
  DistortionInfeasible,
  MseRequiresDiagonal,
  NumericalFailure,
  MRequiresKx,
  InvariantViolation,
  SchemeInfeasible,
  InfeasibleConstruction,
  SingularCorrection,
  FamilyMismatch,
  NoFeasiblePointFound,
  Infeasible,
  NonConvergence,
  DimensionTooLarge,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code lets
/// callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hbrd
