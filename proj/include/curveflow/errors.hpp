#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace curveflow {

enum class ErrorCode {
  NonImmersed,
  NotClosed,
  RotationResidual,
  RemeshFailed,
  BandwidthTooLow,
  NonPositiveArea,
  NotApplicable,
  InsufficientResolution,
  NotDecaying,
  PhaseUndefined,
  TooCoarse,
  StabilityViolation,
  UnknownPreset,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonImmersed: return "NonImmersed";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::RotationResidual: return "RotationResidual";
    case ErrorCode::RemeshFailed: return "RemeshFailed";
    case ErrorCode::BandwidthTooLow: return "BandwidthTooLow";
    case ErrorCode::NonPositiveArea: return "NonPositiveArea";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::InsufficientResolution: return "InsufficientResolution";
    case ErrorCode::NotDecaying: return "NotDecaying";
    case ErrorCode::PhaseUndefined: return "PhaseUndefined";
    case ErrorCode::TooCoarse: return "TooCoarse";
    case ErrorCode::StabilityViolation: return "StabilityViolation";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the stepper's rejection loop, the CLI exit-status logic) can
/// branch on it without parsing messages.
class CurveflowError : public std::runtime_error {
 public:
  CurveflowError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace curveflow
