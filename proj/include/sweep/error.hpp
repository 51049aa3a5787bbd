#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sweep {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  InvalidSet,
  InvalidField,
  NotInSet,
  OutsideEnlargement,
  AmbiguousProjection,
  InsufficientSamples,
  StepTooLarge,
  IntegrationFailure,
  InvalidAlpha,
  NegativeB,
  GridMismatch,
  OffGrid,
  WrongFieldKind,
  NotConverged,
  NotConvex,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sweep
