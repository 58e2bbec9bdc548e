// errors.hpp — error codes shared by all solvers
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cavitrans {

enum class ErrorCode {
  MissingKey,
  NonPositiveRate,
  InvalidArgument,
  GridTooCoarse,
  GridMismatch,
  SingularMatrix,
  SingularDenominator,
  NotConverged,
  ConsistencyViolation,
  UnphysicalPopulation,
  CutoffTooSmall,
  StepTooLarge,
  DegenerateNullSpace,
  InsufficientHorizon,
  NoConvergence,
  NoTransferDetected,
  PeaksNotResolved,
  InvertedPopulations,
  ParameterMismatch,
  Io,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ConsistencyViolation: return "ConsistencyViolation";
    case ErrorCode::UnphysicalPopulation: return "UnphysicalPopulation";
    case ErrorCode::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::DegenerateNullSpace: return "DegenerateNullSpace";
    case ErrorCode::InsufficientHorizon: return "InsufficientHorizon";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoTransferDetected: return "NoTransferDetected";
    case ErrorCode::PeaksNotResolved: return "PeaksNotResolved";
    case ErrorCode::InvertedPopulations: return "InvertedPopulations";
    case ErrorCode::ParameterMismatch: return "ParameterMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cavitrans
