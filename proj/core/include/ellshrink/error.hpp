#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ellshrink {

enum class ErrorCode {
  InvalidParameter,
  DivergentMoment,
  SignedMeasureSampling,
  DofTooSmall,
  DegenerateScatter,
  DimensionMismatch,
  NotPositiveDefinite,
  BadSpec,
  BadGrid,
  TooFewSamples,
  DimensionTooLarge,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure the library reports is an Error carrying one of the codes
// above; callers switch on code() rather than on the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ellshrink
