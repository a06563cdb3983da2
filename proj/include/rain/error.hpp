#pragma once

#include <stdexcept>
#include <string>

namespace rain {

enum class ErrorCode {
  SingletonZero,
  MonotoneViolation,
  CurvatureOutOfRange,
  GroundSetTooLarge,
  DegenerateDenominator,
  TooManySubsets,
  SearchSpaceTooLarge,
  DimensionMismatch,
  SingularInnovation,
  TargetAtSensor,
  PoseOutsideGrid,
  ConfigInvalid,
  EmptyTrace,
  EmptyTable,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace rain
