#pragma once

#include <stdexcept>
#include <string>

namespace das {

enum class ErrorCode {
  NotPositiveDefinite,
  NonPositiveConditionalVariance,
  SingularExtension,
  DimensionMismatch,
  InvalidRho,
  InvalidArgument,
  ParseError,
  EmptyInput,
  Io,
};

const char* to_string(ErrorCode code);

/// Every library failure is reported through this type; `code()` lets callers
/// distinguish numeric failures from malformed input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace das
