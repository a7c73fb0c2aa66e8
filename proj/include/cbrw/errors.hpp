#pragma once

#include <stdexcept>
#include <string>

namespace cbrw {

enum class ErrorCode {
  AsymmetricKernel,
  ReducibleKernel,
  EmptyKernel,
  InvalidModel,
  NonconvergentSeries,
  DeltaOutOfRange,
  QuadratureFailure,
  ToleranceUnachievable,
  DivergentGreen,
  SingularHessian,
  NonpositiveRho,
  DeconvolutionInstability,
  StepTooCoarse,
  GridMismatch,
  DenominatorVanishes,
  BoundViolation,
  TailBoundTooLarge,
  InfiniteSecondMoment,
  NonpositiveConstant,
  NonpositiveSurvivalConstant,
  DegenerateDenominator,
  ParticleCapExceeded,
  InvalidSeed,
  InsufficientSurvivors,
  ConfigMismatch,
  ParseError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::AsymmetricKernel: return "AsymmetricKernel";
    case ErrorCode::ReducibleKernel: return "ReducibleKernel";
    case ErrorCode::EmptyKernel: return "EmptyKernel";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NonconvergentSeries: return "NonconvergentSeries";
    case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::ToleranceUnachievable: return "ToleranceUnachievable";
    case ErrorCode::DivergentGreen: return "DivergentGreen";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NonpositiveRho: return "NonpositiveRho";
    case ErrorCode::DeconvolutionInstability: return "DeconvolutionInstability";
    case ErrorCode::StepTooCoarse: return "StepTooCoarse";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DenominatorVanishes: return "DenominatorVanishes";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::TailBoundTooLarge: return "TailBoundTooLarge";
    case ErrorCode::InfiniteSecondMoment: return "InfiniteSecondMoment";
    case ErrorCode::NonpositiveConstant: return "NonpositiveConstant";
    case ErrorCode::NonpositiveSurvivalConstant: return "NonpositiveSurvivalConstant";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::ParticleCapExceeded: return "ParticleCapExceeded";
    case ErrorCode::InvalidSeed: return "InvalidSeed";
    case ErrorCode::InsufficientSurvivors: return "InsufficientSurvivors";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

/// Library-wide exception carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace cbrw
