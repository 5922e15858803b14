#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kneadlab {

enum class ErrorCode {
  OutOfDomain,
  NotSelfMap,
  InvalidParameter,
  InvalidWord,
  ContainsCriticalSymbol,
  PrefixTooShort,
  InsufficientOccurrences,
  IrreducibleRequired,
  EmptyCylinder,
  NonContraction,
  NoOrbitPredicted,
  DivergentInput,
  NoReversingFixedPoint,
  CriticalNonReturn,
  PrecisionExhausted,
  TooShallow,
  DegenerateOrbit,
  CycleNotClosed,
  TooManyGaps,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotSelfMap: return "NotSelfMap";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidWord: return "InvalidWord";
    case ErrorCode::ContainsCriticalSymbol: return "ContainsCriticalSymbol";
    case ErrorCode::PrefixTooShort: return "PrefixTooShort";
    case ErrorCode::InsufficientOccurrences: return "InsufficientOccurrences";
    case ErrorCode::IrreducibleRequired: return "IrreducibleRequired";
    case ErrorCode::EmptyCylinder: return "EmptyCylinder";
    case ErrorCode::NonContraction: return "NonContraction";
    case ErrorCode::NoOrbitPredicted: return "NoOrbitPredicted";
    case ErrorCode::DivergentInput: return "DivergentInput";
    case ErrorCode::NoReversingFixedPoint: return "NoReversingFixedPoint";
    case ErrorCode::CriticalNonReturn: return "CriticalNonReturn";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::TooShallow: return "TooShallow";
    case ErrorCode::DegenerateOrbit: return "DegenerateOrbit";
    case ErrorCode::CycleNotClosed: return "CycleNotClosed";
    case ErrorCode::TooManyGaps: return "TooManyGaps";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// the verification harness can embed it in a report instead of aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kneadlab
