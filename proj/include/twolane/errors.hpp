#pragma once

#include <stdexcept>
#include <string>

namespace twolane {

/// Model or parameter violates a structural assumption (monotone velocities,
/// nonnegative lane-change rate, positive maximum densities, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration document could not be parsed or does not match the schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A runtime invariant of the simulation failed (box bounds, flux domain).
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace twolane
