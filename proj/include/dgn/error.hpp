#ifndef DGN_ERROR_HPP
#define DGN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dgn {

enum class ErrorCode {
  NotPositiveDefinite,
  AsymmetricInput,
  DimensionMismatch,
  OutsideStrip,
  UnknownParameter,
  WrongRegime,
  DegeneratePortfolio,
  MaxCyclesExceeded,
  NonFiniteIntegrand,
  QuadratureFailure,
  BracketingFailure,
  VanishingDensity,
  LevelOutOfRange,
  InsufficientTailSample,
  IntervalNotFound,
  ResourceExhausted,
  InvalidArgument,
  ParseError,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OutsideStrip: return "OutsideStrip";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::DegeneratePortfolio: return "DegeneratePortfolio";
    case ErrorCode::MaxCyclesExceeded: return "MaxCyclesExceeded";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::BracketingFailure: return "BracketingFailure";
    case ErrorCode::VanishingDensity: return "VanishingDensity";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::InsufficientTailSample: return "InsufficientTailSample";
    case ErrorCode::IntervalNotFound: return "IntervalNotFound";
    case ErrorCode::ResourceExhausted: return "ResourceExhausted";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace dgn

#endif  // DGN_ERROR_HPP
