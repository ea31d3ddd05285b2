#pragma once

#include <stdexcept>
#include <string>

namespace pglake {

// Error families map 1:1 onto the process exit codes of the CLI
// (config -> 2, io -> 3, shape -> 4, numeric/internal -> 1).

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pglake
