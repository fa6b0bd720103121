#include "toric/error.hpp"

namespace toric {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::EmptyInterior: return "EmptyInterior";
    case ErrorKind::NotDelzant: return "NotDelzant";
    case ErrorKind::InvalidTruncation: return "InvalidTruncation";
    case ErrorKind::PolytopeMismatch: return "PolytopeMismatch";
    case ErrorKind::BasisMismatch: return "BasisMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::SingularGram:
    case ErrorKind::ToleranceNotMet:
    case ErrorKind::Divergence:
      return 3;
    case ErrorKind::BudgetExceeded:
      return 4;
    default:
      return 2;
  }
}

}  // namespace toric
