#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arcs {

enum class ErrorCode {
  // input / validation
  MalformedRow,
  DuplicateRecord,
  NonPositiveValue,
  MixedQualityMetric,
  InvalidSpec,
  InvalidPlan,
  PlanTargetUnknown,
  // computation
  EmptyDataset,
  NonPositiveDecodeTime,
  BoundsMismatch,
  AllRungsAbsent,
  SearchSpaceTooLarge,
  NoPresentRungs,
  TooFewPoints,
  NoQualityOverlap,
  AxisMismatch,
  MetricMismatch,
  EmptyInput,
  InvalidLadder,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::MixedQualityMetric: return "MixedQualityMetric";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::PlanTargetUnknown: return "PlanTargetUnknown";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NonPositiveDecodeTime: return "NonPositiveDecodeTime";
    case ErrorCode::BoundsMismatch: return "BoundsMismatch";
    case ErrorCode::AllRungsAbsent: return "AllRungsAbsent";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::NoPresentRungs: return "NoPresentRungs";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoQualityOverlap: return "NoQualityOverlap";
    case ErrorCode::AxisMismatch: return "AxisMismatch";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidLadder: return "InvalidLadder";
  }
  return "Unknown";
}

/// True for errors caused by bad input data or configuration (CLI exit 1);
/// everything else is a computation error (CLI exit 2).
constexpr bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow:
    case ErrorCode::DuplicateRecord:
    case ErrorCode::NonPositiveValue:
    case ErrorCode::MixedQualityMetric:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidPlan:
    case ErrorCode::PlanTargetUnknown:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace arcs
