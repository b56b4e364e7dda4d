#pragma once

#include <stdexcept>
#include <string>

namespace blend {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model or run configuration is incomplete or inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity is mathematically undefined for the given inputs
/// (zero lift baseline, zero utopia coordinate, zero CTR divisor).
class UndefinedValue : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// File or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace blend
