#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magpeel {

/// Coarse error classes. They map one-to-one onto CLI exit codes.
enum class ErrorClass { Input = 2, Numerical = 3, Certification = 4 };

enum class ErrorCode {
  // input / validation
  NonSquare,
  NonFiniteEntry,
  NegativeEntry,
  NonzeroDiagonal,
  AsymmetryBeyondTolerance,
  TriangleViolation,
  DuplicatePoints,
  ZeroVector,
  IndexOutOfRange,
  DimensionMismatch,
  InvalidArgument,
  NonPositiveScale,
  InvalidOrder,
  NotOnSimplex,
  InvalidExponent,
  ProductTooLarge,
  SourceTargetCoincide,
  UnknownNode,
  ParseError,
  // numerical
  SingularOrIndefinite,
  ResidualTooLarge,
  SingularMatrix,
  SingularSubmatrix,
  IterationOverflow,
  NoConvergence,
  NonPositiveWeighting,
  Underflow,
  DisconnectedSourceTarget,
  NoPathsWithStops,
  // certification
  NotNegativeType,
  AntipodesPresent,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::AsymmetryBeyondTolerance: return "AsymmetryBeyondTolerance";
    case ErrorCode::TriangleViolation: return "TriangleViolation";
    case ErrorCode::DuplicatePoints: return "DuplicatePoints";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::NotOnSimplex: return "NotOnSimplex";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::ProductTooLarge: return "ProductTooLarge";
    case ErrorCode::SourceTargetCoincide: return "SourceTargetCoincide";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SingularOrIndefinite: return "SingularOrIndefinite";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::SingularSubmatrix: return "SingularSubmatrix";
    case ErrorCode::IterationOverflow: return "IterationOverflow";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonPositiveWeighting: return "NonPositiveWeighting";
    case ErrorCode::Underflow: return "Underflow";
    case ErrorCode::DisconnectedSourceTarget: return "DisconnectedSourceTarget";
    case ErrorCode::NoPathsWithStops: return "NoPathsWithStops";
    case ErrorCode::NotNegativeType: return "NotNegativeType";
    case ErrorCode::AntipodesPresent: return "AntipodesPresent";
  }
  return "Unknown";
}

constexpr ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularOrIndefinite:
    case ErrorCode::ResidualTooLarge:
    case ErrorCode::SingularMatrix:
    case ErrorCode::SingularSubmatrix:
    case ErrorCode::IterationOverflow:
    case ErrorCode::NoConvergence:
    case ErrorCode::NonPositiveWeighting:
    case ErrorCode::Underflow:
    case ErrorCode::DisconnectedSourceTarget:
    case ErrorCode::NoPathsWithStops:
      return ErrorClass::Numerical;
    case ErrorCode::NotNegativeType:
    case ErrorCode::AntipodesPresent:
      return ErrorClass::Certification;
    default:
      return ErrorClass::Input;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return magpeel::error_class(code_); }

 private:
  ErrorCode code_;
};

}  // namespace magpeel
