#include <qbmor/errors.hpp>

namespace qbmor {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotStable: return "NotStable";
    case ErrorCode::SolverBreakdown: return "SolverBreakdown";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorCode::PairingViolation: return "PairingViolation";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::DegradedDiagnostics: return "DegradedDiagnostics";
    case ErrorCode::ProjectorSingular: return "ProjectorSingular";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

}  // namespace qbmor
