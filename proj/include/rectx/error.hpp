#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rectx {

enum class ErrorKind {
  InvalidArgument,
  InconsistentTerm,
  ValidClause,
  MalformedCsv,
  UnknownLabelColumn,
  MissingValue,
  SchemaMismatch,
  EmptyTrainingSet,
  SchemaVersionMismatch,
  DanglingConditionId,
  MalformedModel,
  MalformedTheory,
  MalformedRule,
  CarInTheory,
  EmptyDataset,
  ZeroBodySupport,
  NotACar,
  NoConflict,
  ConflictingRuleSet,
  InfeasibleInstance,
  TooLargeForOracle,
  OverlappingPreferenceSets,
  DegenerateClassDistribution,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InconsistentTerm: return "InconsistentTerm";
    case ErrorKind::ValidClause: return "ValidClause";
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::UnknownLabelColumn: return "UnknownLabelColumn";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::DanglingConditionId: return "DanglingConditionId";
    case ErrorKind::MalformedModel: return "MalformedModel";
    case ErrorKind::MalformedTheory: return "MalformedTheory";
    case ErrorKind::MalformedRule: return "MalformedRule";
    case ErrorKind::CarInTheory: return "CarInTheory";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ZeroBodySupport: return "ZeroBodySupport";
    case ErrorKind::NotACar: return "NotACar";
    case ErrorKind::NoConflict: return "NoConflict";
    case ErrorKind::ConflictingRuleSet: return "ConflictingRuleSet";
    case ErrorKind::InfeasibleInstance: return "InfeasibleInstance";
    case ErrorKind::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorKind::OverlappingPreferenceSets: return "OverlappingPreferenceSets";
    case ErrorKind::DegenerateClassDistribution: return "DegenerateClassDistribution";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// All library failures are reported through this exception; `kind()` is
/// stable and machine-readable, `what()` carries row/column/rule context.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rectx
