#include "hybridflow/node_transfer.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "hybridflow/errors.hpp"

namespace hybridflow {

double PedestrianPool::total() const { return totalDensity(persons); }

std::vector<double> PedestrianPool::mix() const {
  const double sum = total();
  std::vector<double> out(persons.size(), 0.0);
  if (sum > 0.0) {
    for (std::size_t k = 0; k < persons.size(); ++k) out[k] = persons[k] / sum;
  }
  return out;
}

double CarPool::totalCars() const { return totalDensity(cars); }
double CarPool::totalPersons() const { return totalDensity(persons); }

void CarPool::clear() {
  std::fill(cars.begin(), cars.end(), 0.0);
  std::fill(persons.begin(), persons.end(), 0.0);
}

NodeBuffer NodeBuffer::make(std::size_t pedestrianClasses, std::size_t carClasses) {
  NodeBuffer b;
  b.pedestrians.persons.assign(pedestrianClasses, 0.0);
  b.cars.cars.assign(carClasses, 0.0);
  b.cars.persons.assign(carClasses, 0.0);
  b.arrivingCars = b.cars;
  return b;
}

double NodeBuffer::persons() const {
  return pedestrians.total() + cars.totalPersons() + arrivingCars.totalPersons() + waitingRiders;
}

double harvestEndCell(TransferContext& ctx, std::size_t edgeIndex) {
  const auto& edge = ctx.network.edge(edgeIndex);
  auto& state = ctx.edges[edgeIndex];
  auto& node = ctx.nodes[edge.head];
  const bool parking = ctx.network.node(edge.head).kind == NodeKind::Parking;
  const std::size_t cell = state.grid.end;
  const double area = edge.width * edge.dx;

  double persons = 0.0;
  for (std::size_t k = 0; k < state.classes; ++k) {
    const double amount = state.at(k, cell) * area;
    state.at(k, cell) = 0.0;
    if (edge.mode == EdgeMode::Walkway) {
      persons += amount;
      if (parking) {
        node.buffer.waitingRiders += amount;
      } else {
        node.buffer.pedestrians.persons[k] += amount;
      }
    } else {
      const double riders = state.riders(k, cell) * area;
      state.riders(k, cell) = 0.0;
      persons += riders;
      auto& pool = parking ? node.buffer.arrivingCars : node.buffer.cars;
      pool.cars[k] += amount;
      pool.persons[k] += riders;
    }
  }
  return persons;
}

TraverseReport traverseEdge(TransferContext& ctx, std::size_t edge, double dt) {
  TraverseReport report;
  const auto head = ctx.network.edge(edge).head;
  const auto& model = ctx.model.forMode(ctx.network.edge(edge).mode);
  if (ctx.nodes[head].isFull) {
    report.solve = solveEdge(ctx.edges[edge], model, dt);
    return report;
  }
  report.harvestedPersons += harvestEndCell(ctx, edge);
  report.solve = solveEdge(ctx.edges[edge], model, dt);
  report.harvestedPersons += harvestEndCell(ctx, edge);
  return report;
}

void setFull(TransferContext& ctx, std::size_t node, bool full) {
  for (auto e : ctx.network.node(node).incoming) {
    auto& state = ctx.edges[e];
    if (full) {
      if (state.fullCells == 0) state.fullCells = 1;
    } else {
      state.fullCells = 0;
    }
  }
  ctx.nodes[node].isFull = full;
}

namespace {

struct Placement {
  double friction = 1.0;
  bool placedAll = true;
};

/// Places `amounts` (persons or cars per class) and optional `riders` into the
/// start cells of `targets`, edge e receiving share[e] of the population.
Placement place(TransferContext& ctx, std::span<const std::size_t> targets,
                std::span<const double> shares, std::vector<double>& amounts,
                std::vector<double>* riders) {
  const double population = totalDensity(amounts);
  if (population <= 0.0) return {};

  double friction = 1.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto& edge = ctx.network.edge(targets[t]);
    const auto& state = ctx.edges[targets[t]];
    const double area = edge.width * edge.dx;
    const double wanted = population * shares[t] / area;
    const double room =
        std::max(0.0, ctx.model.forMode(edge.mode).rhoMax() - state.total(state.grid.start));
    if (wanted > 0.0) friction = std::min(friction, room / wanted);
  }

  for (std::size_t k = 0; k < amounts.size(); ++k) {
    double placed = 0.0;
    double placedRiders = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto& edge = ctx.network.edge(targets[t]);
      auto& state = ctx.edges[targets[t]];
      const double area = edge.width * edge.dx;
      const double add = friction * amounts[k] * shares[t] / area;
      state.at(k, state.grid.start) += add;
      placed += add * area;
      if (riders) {
        const double addRiders = friction * (*riders)[k] * shares[t] / area;
        state.riders(k, state.grid.start) += addRiders;
        placedRiders += addRiders * area;
      }
    }
    if (friction == 1.0) {
      amounts[k] = 0.0;
      if (riders) (*riders)[k] = 0.0;
    } else {
      amounts[k] = std::max(0.0, amounts[k] - placed);
      if (riders) (*riders)[k] = std::max(0.0, (*riders)[k] - placedRiders);
    }
  }
  return {friction, friction == 1.0};
}

std::vector<std::size_t> outgoingOfMode(const Network& network, std::size_t node, EdgeMode mode) {
  std::vector<std::size_t> out;
  for (auto e : network.node(node).outgoing) {
    if (network.edge(e).mode == mode) out.push_back(e);
  }
  return out;
}

std::vector<double> fixedShares(const Network& network, std::size_t node,
                                std::span<const std::size_t> targets) {
  const auto& n = network.node(node);
  std::vector<double> shares;
  for (auto e : targets) {
    if (n.distributorWeights.empty()) {
      shares.push_back(network.edge(e).width * network.edge(e).dx);
    } else {
      const auto pos = std::find(n.outgoing.begin(), n.outgoing.end(), e) - n.outgoing.begin();
      shares.push_back(n.distributorWeights[static_cast<std::size_t>(pos)]);
    }
  }
  const double sum = totalDensity(shares);
  for (auto& s : shares) s /= sum;
  return shares;
}

[[noreturn]] void deadEnd(const Network& network, std::size_t node, EdgeMode mode) {
  std::ostringstream msg;
  msg << "node '" << network.node(node).id << "' holds " << toString(mode)
      << " traffic but has no outgoing " << toString(mode) << " edge";
  throw RoutingDeadEndError(msg.str());
}

void finishDistribution(TransferContext& ctx, std::size_t node, const DistributionResult& r) {
  setFull(ctx, node, ctx.finiteNodes && !r.placedAll);
}

}  // namespace

DistributionResult distributeFixed(TransferContext& ctx, std::size_t node) {
  DistributionResult result;
  if (ctx.network.node(node).kind == NodeKind::Exit) return result;
  auto& buffer = ctx.nodes[node].buffer;

  if (buffer.pedestrians.total() > 0.0) {
    const auto targets = outgoingOfMode(ctx.network, node, EdgeMode::Walkway);
    if (targets.empty()) deadEnd(ctx.network, node, EdgeMode::Walkway);
    const auto shares = fixedShares(ctx.network, node, targets);
    const auto p = place(ctx, targets, shares, buffer.pedestrians.persons, nullptr);
    result.pedestrianFriction = p.friction;
    result.placedAll = result.placedAll && p.placedAll;
  }
  if (buffer.cars.totalCars() > 0.0) {
    const auto targets = outgoingOfMode(ctx.network, node, EdgeMode::Street);
    if (targets.empty()) deadEnd(ctx.network, node, EdgeMode::Street);
    const auto shares = fixedShares(ctx.network, node, targets);
    const auto p = place(ctx, targets, shares, buffer.cars.cars, &buffer.cars.persons);
    result.carFriction = p.friction;
    result.placedAll = result.placedAll && p.placedAll;
  }
  finishDistribution(ctx, node, result);
  return result;
}

DistributionResult distributeRouted(TransferContext& ctx, std::size_t node,
                                    const RoutingTable& routes,
                                    std::span<const EdgeWeight> weights) {
  DistributionResult result;
  if (ctx.network.node(node).kind == NodeKind::Exit) return result;
  auto& buffer = ctx.nodes[node].buffer;

  auto chooseEdge = [&](EdgeMode mode) -> std::optional<std::size_t> {
    const auto candidates = outgoingOfMode(ctx.network, node, mode);
    if (candidates.empty()) deadEnd(ctx.network, node, mode);
    const auto preferred = routes.nextEdge(node, mode);
    if (preferred && !weights[*preferred].closed) return preferred;
    std::optional<std::size_t> best;
    double bestCost = std::numeric_limits<double>::infinity();
    for (auto e : candidates) {
      if (weights[e].closed) continue;
      const auto head = ctx.network.edge(e).head;
      const double cost = weights[e].value + routes.cost(head, departureMode(ctx.network, head, mode));
      if (cost < bestCost) {
        bestCost = cost;
        best = e;
      }
    }
    return best;
  };

  const double single[] = {1.0};
  if (buffer.pedestrians.total() > 0.0) {
    if (const auto e = chooseEdge(EdgeMode::Walkway)) {
      const std::size_t target[] = {*e};
      const auto p = place(ctx, target, single, buffer.pedestrians.persons, nullptr);
      result.pedestrianFriction = p.friction;
      result.placedAll = result.placedAll && p.placedAll;
    } else {
      result.pedestrianFriction = 0.0;
      result.placedAll = false;
      result.routesClosed = true;
    }
  }
  if (buffer.cars.totalCars() > 0.0) {
    if (const auto e = chooseEdge(EdgeMode::Street)) {
      const std::size_t target[] = {*e};
      const auto p = place(ctx, target, single, buffer.cars.cars, &buffer.cars.persons);
      result.carFriction = p.friction;
      result.placedAll = result.placedAll && p.placedAll;
    } else {
      result.carFriction = 0.0;
      result.placedAll = false;
      result.routesClosed = true;
    }
  }
  finishDistribution(ctx, node, result);
  return result;
}

TransformReport transformAtParking(NodeState& node, const TrafficModel& model,
                                   const OccupancyDistribution& occupancy, Rng& rng) {
  TransformReport report;
  auto& buffer = node.buffer;

  report.carsParked = buffer.arrivingCars.totalCars();
  const double released = buffer.arrivingCars.totalPersons();
  if (released > 0.0) {
    const auto& weights = model.walkway.classes.weights();
    for (std::size_t k = 0; k < weights.size(); ++k) {
      buffer.pedestrians.persons[k] += released * weights[k];
    }
  }
  report.personsReleased = released;
  buffer.arrivingCars.clear();

  const auto& carWeights = model.street.classes.weights();
  while (true) {
    if (node.nextGroupSize == 0) node.nextGroupSize = sampleOccupancy(rng, occupancy);
    const auto group = static_cast<double>(node.nextGroupSize);
    if (buffer.waitingRiders < group) break;
    buffer.waitingRiders -= group;
    for (std::size_t k = 0; k < carWeights.size(); ++k) {
      buffer.cars.cars[k] += carWeights[k];
      buffer.cars.persons[k] += group * carWeights[k];
    }
    report.personsBoarded += group;
    ++report.carsFormed;
    node.nextGroupSize = 0;
  }
  return report;
}

CarAssembler::Parcel CarAssembler::add(double cars, Rng& rng,
                                       const OccupancyDistribution& occupancy) {
  Parcel parcel;
  double remaining = cars;
  while (remaining > 0.0) {
    if (occupancy_ == 0) occupancy_ = sampleOccupancy(rng, occupancy);
    const double take = std::min(remaining, 1.0 - filled_);
    parcel.cars += take;
    parcel.persons += take * occupancy_;
    filled_ += take;
    remaining -= take;
    if (filled_ >= 1.0 - 1e-12) {
      filled_ = 0.0;
      occupancy_ = 0;
    }
  }
  return parcel;
}

}  // namespace hybridflow
