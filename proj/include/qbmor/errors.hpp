/// \file errors.hpp
/// \brief Error categories raised by the qbmor library.
#ifndef QBMOR_ERRORS_HPP
#define QBMOR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qbmor {

/// \brief Machine-readable category of a library failure.
enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotStable,
  SolverBreakdown,
  SingularShift,
  NonDiagonalizable,
  PairingViolation,
  SingularGram,
  NonPositiveGamma,
  NoConvergence,
  MaxIterationsExceeded,
  DegradedDiagnostics,
  ProjectorSingular,
  TooLarge,
  RankDeficient,
  NewtonDivergence,
  NonFiniteState,
  GridMismatch,
  Unsupported,
  Io
};

/// \brief Human-readable name of an error code (e.g. "NotStable").
const char* error_code_name(ErrorCode code);

/// \brief Exception type carrying an ErrorCode.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// \brief Throws Error(code, msg) when cond is false.
inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace qbmor

#endif  // QBMOR_ERRORS_HPP
