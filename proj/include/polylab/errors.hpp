#pragma once

#include <stdexcept>
#include <string>

namespace polylab {

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input is well formed but outside what a construction supports
/// (e.g. zero weights fed to a ratio-based construction).
struct Unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A Monte Carlo estimator could not produce an estimate at all.
struct EstimationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace polylab
