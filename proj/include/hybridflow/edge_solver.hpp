#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hybridflow/fundamental_diagram.hpp"
#include "hybridflow/network.hpp"

namespace hybridflow {

/// Mutable per-edge solver state: per-class densities on the cell grid plus
/// the full-cell queue at the downstream end.
///
/// Street edges additionally carry a passenger field (persons per metre per
/// class) that is advected with exactly the car velocities, so the number of
/// people inside cars stays exact without a mean-field persons-per-car factor.
struct EdgeState {
  CellGrid grid;
  std::size_t classes = 1;
  double dx = 1.0;
  double alpha = 1.0;
  /// Cells N-fullCells .. N-2 are frozen at rho_max; cell N-1-fullCells is
  /// the collecting cell being filled. Zero means no queue.
  std::size_t fullCells = 0;
  std::vector<double> density;
  std::vector<double> passengers;

  static EdgeState make(const CellGrid& grid, std::size_t classes, double dx, double alpha,
                        bool withPassengers);

  bool carriesPassengers() const { return !passengers.empty(); }
  double& at(std::size_t cls, std::size_t cell) { return density[cls * grid.cells + cell]; }
  double at(std::size_t cls, std::size_t cell) const { return density[cls * grid.cells + cell]; }
  double& riders(std::size_t cls, std::size_t cell) { return passengers[cls * grid.cells + cell]; }
  double riders(std::size_t cls, std::size_t cell) const {
    return passengers[cls * grid.cells + cell];
  }

  double total(std::size_t cell) const;
  double totalRiders(std::size_t cell) const;
  /// Last cell that takes part in the upwind update; a wall sits to its right.
  std::size_t lastActiveCell() const;
  /// Sum over classes and cells of rho * dx (per unit width).
  double mass() const;
  double riderMass() const;
  /// Mean total density over the interior cells.
  double meanInteriorDensity() const;
  double maxInteriorDensity() const;

  /// Adds a per-class density profile uniformly over the interior cells.
  void fillInterior(std::span<const double> classDensity, std::span<const double> classRiders = {});
};

/// Forward (F+) and backward (F-) numerical fluxes for one class at cell i.
struct FluxPair {
  double forward = 0.0;
  double backward = 0.0;
};

struct Triplet {
  double left = 0.0;
  double center = 0.0;
  double right = 0.0;
};

/// Upwind flux with velocities evaluated at the alpha-blended total density.
FluxPair flux(const FundamentalDiagram& diagram, double vff, Triplet classDensity, Triplet total,
              double alpha, double dx);

struct StepReport {
  /// Density mass (rho * dx, per unit width) added by clamping round-off negatives.
  double clampedMass = 0.0;
  double clampedRiderMass = 0.0;
  bool jammed = false;
};

/// One explicit upwind step over cells 1..lastActiveCell(). The downstream
/// side of the last active cell is a wall; frozen full cells are untouched.
/// Throws StabilityError when dt exceeds dx / maxSpeed, NegativeDensityError
/// when a density drops below -1e-12.
StepReport stepEdge(EdgeState& state, const ModeModel& model, double dt);

/// Pushes the penultimate available cell into the collecting cell, growing
/// the full-cell zone while the collecting cell saturates. Sets `jammed`
/// when the queue has reached the start cell.
StepReport distributeLastDensities(EdgeState& state, double rhoMax);

/// stepEdge bracketed by distributeLastDensities when the edge has a queue.
StepReport solveEdge(EdgeState& state, const ModeModel& model, double dt);

/// Largest stable timestep for a cell size under a mode's fastest speed.
double maxStableDt(double dx, const ModeModel& model);

/// One violation per edge whose dx / maxSpeed is below dt.
std::vector<Violation> stabilityCheck(const Network& network, const ModeModel& walkway,
                                      const ModeModel& street, double dt);

}  // namespace hybridflow
