#include "hybridflow/edge_solver.hpp"

#include <algorithm>
#include <sstream>

#include "hybridflow/errors.hpp"

namespace hybridflow {

namespace {

constexpr double kNegativeTolerance = 1e-12;

}  // namespace

EdgeState EdgeState::make(const CellGrid& grid, std::size_t classes, double dx, double alpha,
                          bool withPassengers) {
  if (classes == 0) throw std::invalid_argument("edge state needs at least one class");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  EdgeState s;
  s.grid = grid;
  s.classes = classes;
  s.dx = dx;
  s.alpha = alpha;
  s.density.assign(classes * grid.cells, 0.0);
  if (withPassengers) s.passengers.assign(classes * grid.cells, 0.0);
  return s;
}

double EdgeState::total(std::size_t cell) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < classes; ++k) sum += at(k, cell);
  return sum;
}

double EdgeState::totalRiders(std::size_t cell) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < classes; ++k) sum += riders(k, cell);
  return sum;
}

std::size_t EdgeState::lastActiveCell() const {
  return fullCells <= 1 ? grid.end : grid.cells - 1 - fullCells;
}

double EdgeState::mass() const {
  double sum = 0.0;
  for (double d : density) sum += d;
  return sum * dx;
}

double EdgeState::riderMass() const {
  double sum = 0.0;
  for (double d : passengers) sum += d;
  return sum * dx;
}

double EdgeState::meanInteriorDensity() const {
  double sum = 0.0;
  for (std::size_t i = grid.start; i <= grid.end; ++i) sum += total(i);
  return sum / static_cast<double>(grid.interiorCells());
}

double EdgeState::maxInteriorDensity() const {
  double best = 0.0;
  for (std::size_t i = grid.start; i <= grid.end; ++i) best = std::max(best, total(i));
  return best;
}

void EdgeState::fillInterior(std::span<const double> classDensity,
                             std::span<const double> classRiders) {
  if (classDensity.size() != classes) throw std::invalid_argument("class count mismatch");
  if (!classRiders.empty() && (classRiders.size() != classes || !carriesPassengers())) {
    throw std::invalid_argument("rider profile does not match edge");
  }
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t i = grid.start; i <= grid.end; ++i) {
      at(k, i) += classDensity[k];
      if (!classRiders.empty()) riders(k, i) += classRiders[k];
    }
  }
}

FluxPair flux(const FundamentalDiagram& diagram, double vff, Triplet rho, Triplet tot,
              double alpha, double dx) {
  auto v = [&](double from, double to) {
    return diagram.classVelocityClamped(vff, (1.0 - alpha) * from + alpha * to);
  };
  FluxPair f;
  f.forward = (rho.center * v(tot.center, tot.right) - rho.left * v(tot.left, tot.center)) / dx;
  f.backward = (rho.right * v(tot.right, tot.center) - rho.center * v(tot.center, tot.left)) / dx;
  return f;
}

double maxStableDt(double dx, const ModeModel& model) { return dx / model.maxSpeed(); }

StepReport stepEdge(EdgeState& state, const ModeModel& model, double dt) {
  if (model.classes.classCount() != state.classes && !model.diagram.isConstant()) {
    throw std::invalid_argument("edge state class count does not match its mode");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (dt > maxStableDt(state.dx, model) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt " << dt << " exceeds the stable bound " << maxStableDt(state.dx, model)
        << " for dx " << state.dx;
    throw StabilityError(msg.str());
  }

  const std::size_t last = state.lastActiveCell();
  const double alpha = state.alpha;
  const auto& reps = model.classes.representatives();

  // Velocity factor at each interface (i, i+1), i = 0..last-1. The interface
  // after `last` is a wall and carries no flux.
  std::vector<double> totals(last + 1);
  for (std::size_t i = 0; i <= last; ++i) totals[i] = state.total(i);
  std::vector<double> blend(last);
  for (std::size_t i = 0; i < last; ++i) {
    blend[i] = (1.0 - alpha) * totals[i] + alpha * totals[i + 1];
  }
  std::vector<double> factor(last);
  const bool constant = model.diagram.isConstant();
  for (std::size_t i = 0; i < last; ++i) {
    factor[i] = constant ? 1.0 : model.diagram.reducedClamped(blend[i]);
  }

  StepReport report;
  std::vector<double> outflow(last + 1);
  auto advance = [&](auto&& cell, double vff, double& clamped) {
    const double speedScale = constant ? model.diagram.classVelocityClamped(vff, 0.0) : vff;
    outflow[0] = 0.0;
    for (std::size_t i = 1; i < last; ++i) outflow[i] = cell(i) * (speedScale * factor[i]);
    outflow[last] = 0.0;
    for (std::size_t i = 1; i <= last; ++i) {
      double next = cell(i) - dt * ((outflow[i] - outflow[i - 1]) / state.dx);
      if (next < 0.0) {
        if (next < -kNegativeTolerance) {
          std::ostringstream msg;
          msg << "negative density " << next << " in cell " << i;
          throw NegativeDensityError(msg.str());
        }
        clamped -= next * state.dx;
        next = 0.0;
      }
      cell(i) = next;
    }
  };

  for (std::size_t k = 0; k < state.classes; ++k) {
    const double vff = constant ? 0.0 : reps[k];
    advance([&](std::size_t i) -> double& { return state.at(k, i); }, vff, report.clampedMass);
    if (state.carriesPassengers()) {
      advance([&](std::size_t i) -> double& { return state.riders(k, i); }, vff,
              report.clampedRiderMass);
    }
  }
  return report;
}

StepReport distributeLastDensities(EdgeState& state, double rhoMax) {
  if (state.fullCells == 0) {
    throw std::invalid_argument("distributeLastDensities needs an edge with a full-cell queue");
  }
  StepReport report;
  const std::size_t cells = state.grid.cells;
  while (true) {
    const std::size_t fill = state.fullCells;
    const std::size_t ultimate = cells - 1 - fill;
    if (ultimate <= state.grid.start) {
      report.jammed = true;
      return report;
    }
    const std::size_t penultimate = ultimate - 1;
    const double tp = state.total(penultimate);
    if (tp <= 0.0) return report;
    const double tu = state.total(ultimate);

    double fraction = 1.0;
    const bool saturates = tp + tu > rhoMax;
    if (saturates) fraction = std::clamp((rhoMax - tu) / tp, 0.0, 1.0);

    for (std::size_t k = 0; k < state.classes; ++k) {
      const double moved = fraction == 1.0 ? state.at(k, penultimate)
                                           : fraction * state.at(k, penultimate);
      state.at(k, ultimate) += moved;
      state.at(k, penultimate) -= moved;
      if (state.carriesPassengers()) {
        const double movedRiders = fraction == 1.0 ? state.riders(k, penultimate)
                                                   : fraction * state.riders(k, penultimate);
        state.riders(k, ultimate) += movedRiders;
        state.riders(k, penultimate) -= movedRiders;
      }
    }
    if (!saturates) return report;
    if (fill + 1 > cells - 3) {
      // Queue would swallow the start cell: the edge is jammed end to end.
      state.fullCells = cells - 3;
      report.jammed = true;
      return report;
    }
    state.fullCells = fill + 1;
  }
}

StepReport solveEdge(EdgeState& state, const ModeModel& model, double dt) {
  if (state.fullCells == 0) return stepEdge(state, model, dt);
  const double rhoMax = model.rhoMax();
  StepReport before = distributeLastDensities(state, rhoMax);
  StepReport step = stepEdge(state, model, dt);
  StepReport after = distributeLastDensities(state, rhoMax);
  step.jammed = before.jammed || after.jammed;
  return step;
}

std::vector<Violation> stabilityCheck(const Network& network, const ModeModel& walkway,
                                      const ModeModel& street, double dt) {
  std::vector<Violation> report;
  for (const auto& edge : network.edges()) {
    const auto& model = edge.mode == EdgeMode::Walkway ? walkway : street;
    const double bound = maxStableDt(edge.dx, model);
    if (dt > bound) {
      std::ostringstream msg;
      msg << "dt " << dt << " exceeds dx / v_max = " << edge.dx << " / " << model.maxSpeed()
          << " = " << bound;
      report.push_back({edge.id, msg.str()});
    }
  }
  return report;
}

}  // namespace hybridflow
