#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace xpoint {

// Base for every error raised by the library. The CLI maps the derived
// categories onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter violates a model invariant (non-positive surface, etc.).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The nodal system has a floating subgraph with no path to a fixed node.
class SingularNetworkError : public Error {
 public:
  SingularNetworkError(std::string msg, std::vector<std::string> floating)
      : Error(std::move(msg)), floating_nodes_(std::move(floating)) {}
  const std::vector<std::string>& floating_nodes() const { return floating_nodes_; }

 private:
  std::vector<std::string> floating_nodes_;
};

// The transistor saturation clamp iteration did not reach a fixed point.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Base for failures while running a write or read protocol.
class SimulationError : public Error {
 public:
  using Error::Error;
};

class WriteFailure : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class WriteDisturb : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class ReadDisturb : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class IndeterminateRead : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

// A post-condition the tool checks on its own output failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace xpoint
