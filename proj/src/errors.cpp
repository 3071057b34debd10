#include "alab/errors.hpp"

namespace alab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidVariance: return "InvalidVariance";
    case ErrorCode::InvalidTheta: return "InvalidTheta";
    case ErrorCode::ZeroMassCutoff: return "ZeroMassCutoff";
    case ErrorCode::ZeroMassRegion: return "ZeroMassRegion";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::NonFiniteDivergence: return "NonFiniteDivergence";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::UnsupportedSpace: return "UnsupportedSpace";
    case ErrorCode::UnsupportedMode: return "UnsupportedMode";
    case ErrorCode::UnsupportedDivergence: return "UnsupportedDivergence";
    case ErrorCode::CyclicInput: return "CyclicInput";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidQStar: return "InvalidQStar";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::QStarMismatch: return "QStarMismatch";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numeric_failure(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFiniteIntegrand:
    case ErrorCode::NonFiniteDivergence:
    case ErrorCode::ZeroLikelihood:
    case ErrorCode::ZeroMassCutoff:
    case ErrorCode::ZeroMassRegion:
    case ErrorCode::NonMonotone:
    case ErrorCode::NoConvergence:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace alab
