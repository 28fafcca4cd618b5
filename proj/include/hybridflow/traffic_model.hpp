#pragma once

#include <cstddef>

#include "hybridflow/fundamental_diagram.hpp"
#include "hybridflow/network.hpp"

namespace hybridflow {

/// User-facing knobs for both speed laws and their class partitions.
struct ModelParams {
  PedestrianParams pedestrian;
  CarParams car;
  std::size_t pedestrianClasses = 16;
  std::size_t carClasses = 1;
  /// Classes span mean +/- truncation * stddev.
  double truncation = 3.0;

  bool operator==(const ModelParams&) const = default;
};

/// The walkway and street physics used by one simulation.
struct TrafficModel {
  ModeModel walkway;
  ModeModel street;

  /// Throws std::invalid_argument on non-positive parameters.
  static TrafficModel fromParams(const ModelParams& params);

  const ModeModel& forMode(EdgeMode mode) const {
    return mode == EdgeMode::Walkway ? walkway : street;
  }
};

}  // namespace hybridflow
