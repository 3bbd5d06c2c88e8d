#pragma once

#include <stdexcept>
#include <string>

namespace cvshrink {

enum class ErrorCode {
  InvalidSizes,
  DegenerateInput,
  NonConvergence,
  SingleClassTraining,
  DimensionMismatch,
  MismatchedData,
  DegenerateTestSet,
  DegenerateClasses,
  TooFewSplits,
  DegenerateVariance,
  NumericalFailure,
  InsufficientDraws,
  InsufficientData,
  StudyFailed,
  ParseError,
  MissingColumn,
  NonBinaryTarget,
  SchemaMismatch,
  ConfigError,
  IoError,
};

// Exit-status buckets used by the CLI: 2 config, 3 data, 4 numerical.
enum class ErrorCategory { Config = 2, Data = 3, Numerical = 4 };

inline ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::SchemaMismatch:
      return ErrorCategory::Config;
    case ErrorCode::NumericalFailure:
    case ErrorCode::NonConvergence:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::InsufficientDraws:
    case ErrorCode::StudyFailed:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Data;
  }
}

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSizes: return "InvalidSizes";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MismatchedData: return "MismatchedData";
    case ErrorCode::DegenerateTestSet: return "DegenerateTestSet";
    case ErrorCode::DegenerateClasses: return "DegenerateClasses";
    case ErrorCode::TooFewSplits: return "TooFewSplits";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InsufficientDraws: return "InsufficientDraws";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::StudyFailed: return "StudyFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonBinaryTarget: return "NonBinaryTarget";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace cvshrink
