#pragma once

#include <stdexcept>
#include <string>

namespace homeolab {

// Invalid argument or violated precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The sampling grid is too coarse for the requested operation.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical self-check failed (quadrature vs Monte Carlo, certificate, ...).
class NumericalAlarm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed experiment configuration or input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace homeolab
