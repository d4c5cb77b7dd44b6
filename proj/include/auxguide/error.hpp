#pragma once

#include <stdexcept>
#include <string>

namespace auxguide {

enum class ErrorCode {
  NonConvergence,
  DegenerateFraming,
  NotSymmetric,
  NegativeEigenvalue,
  DegenerateInput,
  LengthMismatch,
  TooShort,
  ShapeMismatch,
  RankDeficient,
  DimMismatch,
  TooFewPoints,
  Divergence,
  IoError,
  ParseError,
  UsageError,
  ConfigError,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateFraming: return "DegenerateFraming";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace auxguide
