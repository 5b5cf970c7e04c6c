#pragma once

#include <stdexcept>

namespace omprip {

// Input file or argument failed structural validation (bad CSV header,
// malformed JSON, inconsistent dimensions, ...).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An exact support enumeration would exceed the configured budget; the
// caller should fall back to sampled certification.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An inner solver (restricted Newton, line search, ...) failed to reach its
// optimality tolerance.  We report this instead of returning a guess.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace omprip
