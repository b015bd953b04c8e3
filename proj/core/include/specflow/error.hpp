#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specflow {

enum class ErrorCode {
  InvalidArgument,
  NotHermitian,
  NonFiniteValue,
  DimensionMismatch,
  OnEigenvalue,
  AmbiguousAtBreakpoint,
  NotProjection,
  NotInvertibleAtInfinity,
  UnresolvedCrossing,
  InternalConsistency,
  TruncateFirst,
  DynamicRangeExceeded,
  SingularSystem,
  UnexpectedBoundState,
  CapExceeded,
  NoSpectralGapAtThreshold,
  UnstableLevel,
  IllConditionedIntersection,
  InfeasibleTarget,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OnEigenvalue: return "OnEigenvalue";
    case ErrorCode::AmbiguousAtBreakpoint: return "AmbiguousAtBreakpoint";
    case ErrorCode::NotProjection: return "NotProjection";
    case ErrorCode::NotInvertibleAtInfinity: return "NotInvertibleAtInfinity";
    case ErrorCode::UnresolvedCrossing: return "UnresolvedCrossing";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
    case ErrorCode::TruncateFirst: return "TruncateFirst";
    case ErrorCode::DynamicRangeExceeded: return "DynamicRangeExceeded";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::UnexpectedBoundState: return "UnexpectedBoundState";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::NoSpectralGapAtThreshold: return "NoSpectralGapAtThreshold";
    case ErrorCode::UnstableLevel: return "UnstableLevel";
    case ErrorCode::IllConditionedIntersection: return "IllConditionedIntersection";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every numerical guard in the library reports through this type; `code()`
/// is stable and is what reports and tests key on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace specflow
