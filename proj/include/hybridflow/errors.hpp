#pragma once

#include <stdexcept>
#include <string>

namespace hybridflow {

/// Base class for failures that abort a simulation run.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StabilityError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class NegativeDensityError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class AuditDriftError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class RoutingDeadEndError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

}  // namespace hybridflow
