#pragma once

#include <stdexcept>
#include <string>

namespace marlpc {

// Raised for malformed or out-of-range configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a simulation or training step produces non-finite values; CLI exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace marlpc
