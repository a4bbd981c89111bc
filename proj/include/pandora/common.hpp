#pragma once

#include <stdexcept>
#include <string>

namespace pandora {

// Invalid numeric arguments / precondition violations.
using InputError = std::invalid_argument;

// A numeric routine failed to reach its tolerance (root bracketing, fixed
// point, fit, equilibrium iteration).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An instance is too large for an exact / enumerative routine.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scripted simulation reached a decision node its script does not cover.
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed scenario or configuration parameters.
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pandora
