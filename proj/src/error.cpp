#include "rain/error.hpp"

namespace rain {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingletonZero: return "SingletonZero";
    case ErrorCode::MonotoneViolation: return "MonotoneViolation";
    case ErrorCode::CurvatureOutOfRange: return "CurvatureOutOfRange";
    case ErrorCode::GroundSetTooLarge: return "GroundSetTooLarge";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::TooManySubsets: return "TooManySubsets";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularInnovation: return "SingularInnovation";
    case ErrorCode::TargetAtSensor: return "TargetAtSensor";
    case ErrorCode::PoseOutsideGrid: return "PoseOutsideGrid";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace rain
