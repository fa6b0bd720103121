#pragma once

#include <stdexcept>
#include <string>

namespace toric {

enum class ErrorKind {
  InvalidInput,
  Unbounded,
  EmptyInterior,
  NotDelzant,
  InvalidTruncation,
  PolytopeMismatch,
  BasisMismatch,
  NotPositiveDefinite,
  SingularGram,
  ToleranceNotMet,
  Divergence,
  BudgetExceeded,
};

const char* to_string(ErrorKind kind);

// process exit code used by the CLI: 2 input, 3 numerics, 4 budget
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace toric
