#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ultratree {

enum class ErrorKind {
  InvalidArgument,
  MergeOfUnknownBlock,
  IncompleteChain,
  TaxonSetMismatch,
  Overflow,
  CapExceeded,
  NotFullyResolved,
  SyntaxError,
  NotUltrametric,
  DuplicateTaxon,
  FewerThanTwoTaxa,
  ChainViolation,
  NonMonotoneTimes,
  OutOfRange,
  NotCellMates,
  InvalidSequence,
  EndpointNotResolved,
  BudgetExceeded,
  NonConvergence,
  NoWitnessPossible,
  EmptyInput,
  UnsupportedN,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MergeOfUnknownBlock: return "MergeOfUnknownBlock";
    case ErrorKind::IncompleteChain: return "IncompleteChain";
    case ErrorKind::TaxonSetMismatch: return "TaxonSetMismatch";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::NotFullyResolved: return "NotFullyResolved";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::NotUltrametric: return "NotUltrametric";
    case ErrorKind::DuplicateTaxon: return "DuplicateTaxon";
    case ErrorKind::FewerThanTwoTaxa: return "FewerThanTwoTaxa";
    case ErrorKind::ChainViolation: return "ChainViolation";
    case ErrorKind::NonMonotoneTimes: return "NonMonotoneTimes";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotCellMates: return "NotCellMates";
    case ErrorKind::InvalidSequence: return "InvalidSequence";
    case ErrorKind::EndpointNotResolved: return "EndpointNotResolved";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NoWitnessPossible: return "NoWitnessPossible";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::UnsupportedN: return "UnsupportedN";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message starts with the kind name
/// so that it can be printed as a one-line machine-readable reason.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ultratree
