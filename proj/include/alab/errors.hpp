#pragma once

#include <stdexcept>
#include <string>

namespace alab {

enum class ErrorCode {
  InvalidParameter,
  InvalidVariance,
  InvalidTheta,
  ZeroMassCutoff,
  ZeroMassRegion,
  NonFiniteIntegrand,
  NonFiniteDivergence,
  SupportMismatch,
  ZeroLikelihood,
  UnsupportedSpace,
  UnsupportedMode,
  UnsupportedDivergence,
  CyclicInput,
  UnknownNode,
  InvalidQStar,
  TooLarge,
  OutOfDomain,
  QStarMismatch,
  NonMonotone,
  NoConvergence,
  ConfigError,
  IoError,
};

/// Stable machine-readable name, e.g. "NonFiniteDivergence".
const char* to_string(ErrorCode code) noexcept;

/// True for failures of the numerics (CLI exit code 2) rather than of the input.
bool is_numeric_failure(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace alab
