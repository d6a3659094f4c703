#pragma once

#include <stdexcept>
#include <string>

namespace epchain {

// Invalid arguments, out-of-range indices, mismatched lengths.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or unknown configuration (files, JSON documents).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Overflow, failed convergence, empty kernels and similar numerical breakdowns.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace epchain
