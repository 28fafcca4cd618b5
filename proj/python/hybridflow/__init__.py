"""Hybrid pedestrian and car network flow simulator."""

from ._core import (
    Result,
    ResultsError,
    ScenarioError,
    Simulation,
    SimulationError,
    StabilityError,
    car_velocity,
    load_scenario,
    occupancy_mean,
    partition_classes,
    pedestrian_velocity,
    sample_occupancy,
)


def run_scenario(path, out_dir=None, **overrides):
    """Load, run to completion and optionally write the result tree."""
    result = load_scenario(path, **overrides).run()
    if out_dir is not None:
        result.write(str(out_dir))
    return result


__all__ = [
    "Result",
    "ResultsError",
    "ScenarioError",
    "Simulation",
    "SimulationError",
    "StabilityError",
    "car_velocity",
    "load_scenario",
    "occupancy_mean",
    "partition_classes",
    "pedestrian_velocity",
    "run_scenario",
    "sample_occupancy",
]
