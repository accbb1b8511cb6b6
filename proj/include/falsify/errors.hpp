#pragma once

#include <stdexcept>
#include <string>

namespace falsify {

/// Invalid configuration value. The message names the offending field.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Index outside a parameter's bin range.
class BoundsError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Non-finite state reached during an episode.
class SimulationFault : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Artifact (scenario file, checkpoint) that does not match the configured space.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace falsify
