#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace truncchain {

enum class ErrorCode {
  NegativeWeight,
  NotNormalized,
  LengthMismatch,
  EmptyClass,
  MassOverflow,
  MetricMismatch,
  ClassMismatch,
  LevelOutOfRange,
  SpaceMismatch,
  BadU,
  NotPSD,
  TooLarge,
  DegenerateTarget,
  InvalidArgument,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-checkable code alongside the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace truncchain
