#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iglu {

enum class ErrorCode {
  OutOfBounds,
  Conflict,
  BoundsMismatch,
  UnsupportedRemoval,
  EmptyDiff,
  EmptyPrediction,
  EmptyGold,
  EmptyBank,
  EmptyInput,
  MissingPrediction,
  MissingPriorPrediction,
  PredictorMissing,
  KindMismatch,
  Unrecognized,
  FileNotFound,
  SchemaError,
  BadFractions,
  InvalidArgument,
  UnknownEpisode,
  UnknownSession,
  WrongPhase,
  Busy,
  Expired,
  ProcessError,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every module; `code()` identifies the failure class
/// named in the module contracts.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iglu
