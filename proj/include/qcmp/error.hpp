#ifndef QCMP_ERROR_HPP
#define QCMP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qcmp {

enum class ErrorCode {
  // input / validation
  ParseError,
  MissingMoment,
  SymmetryViolation,
  NonpositiveMass,
  DegreeTooLow,
  InvalidArgument,
  BadAtomSpec,
  // necessary conditions of the moment problem
  NotHermitian,
  NotPsd,
  RangeNotIncluded,
  // numerical failures
  PersymmetryViolation,
  InfeasibleGamma33,
  NoIntersection,
  RankMismatch,
  AlphaZero,
  AlphaUnimodular,
  SingularBorderedSystem,
  MissingInitialData,
  ConflictingEntry,
  ExpressFailure,
  NegativeWeight,
  IllConditionedVandermonde,
  FlatnessFailure,
  VerificationFailure,
  // the open case a = e, b != f
  UnsupportedCase,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingMoment: return "MissingMoment";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::NonpositiveMass: return "NonpositiveMass";
    case ErrorCode::DegreeTooLow: return "DegreeTooLow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadAtomSpec: return "BadAtomSpec";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::RangeNotIncluded: return "RangeNotIncluded";
    case ErrorCode::PersymmetryViolation: return "PersymmetryViolation";
    case ErrorCode::InfeasibleGamma33: return "InfeasibleGamma33";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::AlphaZero: return "AlphaZero";
    case ErrorCode::AlphaUnimodular: return "AlphaUnimodular";
    case ErrorCode::SingularBorderedSystem: return "SingularBorderedSystem";
    case ErrorCode::MissingInitialData: return "MissingInitialData";
    case ErrorCode::ConflictingEntry: return "ConflictingEntry";
    case ErrorCode::ExpressFailure: return "ExpressFailure";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::IllConditionedVandermonde: return "IllConditionedVandermonde";
    case ErrorCode::FlatnessFailure: return "FlatnessFailure";
    case ErrorCode::VerificationFailure: return "VerificationFailure";
    case ErrorCode::UnsupportedCase: return "UnsupportedCase";
  }
  return "Unknown";
}

/// Process exit code for an error: 1 validation, 2 numerical, 3 unsupported.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::MissingMoment:
    case ErrorCode::SymmetryViolation:
    case ErrorCode::NonpositiveMass:
    case ErrorCode::DegreeTooLow:
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadAtomSpec:
    case ErrorCode::NotHermitian:
    case ErrorCode::NotPsd:
    case ErrorCode::RangeNotIncluded:
      return 1;
    case ErrorCode::UnsupportedCase:
      return 3;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Error that also carries the numerical residual that triggered it.
class ResidualError : public Error {
 public:
  ResidualError(ErrorCode code, const std::string& what, double residual)
      : Error(code, what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace qcmp

#endif  // QCMP_ERROR_HPP
