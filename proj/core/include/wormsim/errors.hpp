#pragma once

#include <stdexcept>
#include <string>

namespace wormsim {

// Error categories map onto the CLI exit codes: ConfigError -> 2,
// SolverError -> 3, InvariantError -> 4. Contract misuse (bad axis, size
// mismatch, nonpositive dt) throws std::invalid_argument instead.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wormsim
