#include "stochinv/common.hpp"

#include <cmath>

namespace stochinv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OrderOutOfRange: return "OrderOutOfRange";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::NotNonnegDefinite: return "NotNonnegDefinite";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::LameViolation: return "LameViolation";
    case ErrorCode::SmoothnessTooLow: return "SmoothnessTooLow";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::TargetInsideSupport: return "TargetInsideSupport";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EnsembleTooSmall: return "EnsembleTooSmall";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::FrequencyTooHigh: return "FrequencyTooHigh";
    case ErrorCode::ThetaSingular: return "ThetaSingular";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::StageFailure: return "StageFailure";
    case ErrorCode::SeriesMissing: return "SeriesMissing";
  }
  return "Unknown";
}

cplx beta(int d) {
  if (d == 2) return std::polar(1.0 / std::sqrt(8.0 * kPi), kPi / 4.0);
  if (d == 3) return {1.0 / (4.0 * kPi), 0.0};
  throw Error(ErrorCode::DimensionMismatch, "beta_d is defined for d = 2 or 3");
}

}  // namespace stochinv
