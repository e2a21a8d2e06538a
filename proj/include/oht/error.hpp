#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oht {

enum class ErrorKind {
  InvalidArgument,
  InvalidDistribution,
  AlphabetMismatch,
  SupportViolation,
  UnknownSymbol,
  EmptySequence,
  WeightSumViolation,
  MTooSmall,
  MTooLarge,
  IndexNotInSet,
  SetNotInSpace,
  LengthMismatch,
  DimensionMismatch,
  NotPsd,
  NonPositiveMass,
  NonPositiveThreshold,
  InsufficientData,
  ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::WeightSumViolation: return "WeightSumViolation";
    case ErrorKind::MTooSmall: return "MTooSmall";
    case ErrorKind::MTooLarge: return "MTooLarge";
    case ErrorKind::IndexNotInSet: return "IndexNotInSet";
    case ErrorKind::SetNotInSpace: return "SetNotInSpace";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPsd: return "NotPsd";
    case ErrorKind::NonPositiveMass: return "NonPositiveMass";
    case ErrorKind::NonPositiveThreshold: return "NonPositiveThreshold";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The text without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace oht
