#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sentetruth {

enum class ErrorCode {
  ParseError,
  DuplicateRecord,
  InvariantViolation,
  IncompletePanel,
  UnknownQuestion,
  UnknownModel,
  EmptyText,
  FixtureMiss,
  RemoteUnavailable,
  DimMismatch,
  ZeroVector,
  TooFewVectors,
  TooFewResponses,
  EmptyPanel,
  InvalidArgument,
  InvalidFraction,
  MissingSubstituteModel,
  MissingJunkCorpus,
  MissingTamperedVariant,
  StalledRound,
  LengthMismatch,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IncompletePanel: return "IncompletePanel";
    case ErrorCode::UnknownQuestion: return "UnknownQuestion";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::TooFewVectors: return "TooFewVectors";
    case ErrorCode::TooFewResponses: return "TooFewResponses";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::MissingSubstituteModel: return "MissingSubstituteModel";
    case ErrorCode::MissingJunkCorpus: return "MissingJunkCorpus";
    case ErrorCode::MissingTamperedVariant: return "MissingTamperedVariant";
    case ErrorCode::StalledRound: return "StalledRound";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception type used across the library. `code()` identifies the failure
/// class; `what()` carries a human-readable message prefixed by the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sentetruth
