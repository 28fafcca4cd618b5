#include "hybridflow/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hybridflow/errors.hpp"

namespace hybridflow {

std::string_view toString(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::Empty: return "empty";
    case TerminationReason::MaxSteps: return "max_steps";
    case TerminationReason::Aborted: return "aborted";
  }
  return "aborted";
}

std::int64_t SimulationConfig::effectiveRecordEvery() const {
  if (recordEvery > 0) return recordEvery;
  if (maxSteps <= 1000) return 1;
  return (maxSteps + 999) / 1000;
}

AuditRecord auditPeople(const Network& network, std::span<const EdgeState> edges,
                        std::span<const NodeState> nodes) {
  AuditRecord record;
  record.edgePersons.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = network.edge(e);
    const double persons = edge.mode == EdgeMode::Walkway ? edges[e].mass() * edge.width
                                                          : edges[e].riderMass() * edge.width;
    record.edgePersons.push_back(persons);
    record.totalPersons += persons;
  }
  record.nodePersons.reserve(nodes.size());
  for (const auto& node : nodes) {
    const double persons = node.buffer.persons();
    record.nodePersons.push_back(persons);
    record.totalPersons += persons;
  }
  return record;
}

double injectDemand(NodeState& node, const DemandEntry& entry, DemandCursor& cursor,
                    const TrafficModel& model, const OccupancyDistribution& occupancy, Rng& rng,
                    double t, double dt) {
  double amount = 0.0;
  if (entry.oneShot) {
    if (!cursor.fired && t >= entry.start) {
      amount = entry.amount;
      cursor.fired = true;
    }
  } else if (t >= entry.start && t < entry.end) {
    amount = entry.amount * dt;
  }
  if (amount <= 0.0) return 0.0;

  if (entry.kind == SubjectKind::Pedestrian) {
    const auto& weights = model.walkway.classes.weights();
    for (std::size_t k = 0; k < weights.size(); ++k) {
      node.buffer.pedestrians.persons[k] += amount * weights[k];
    }
    return amount;
  }
  const auto parcel = cursor.assembler.add(amount, rng, occupancy);
  const auto& weights = model.street.classes.weights();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    node.buffer.cars.cars[k] += parcel.cars * weights[k];
    node.buffer.cars.persons[k] += parcel.persons * weights[k];
  }
  return parcel.persons;
}

namespace {

void checkConfig(const SimulationConfig& config) {
  if (!(config.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (config.maxSteps < 1) throw std::invalid_argument("max_steps must be at least 1");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  if (config.routingCadence < 1) throw std::invalid_argument("routing cadence must be >= 1");
  if (!(config.auditTolerance > 0.0)) throw std::invalid_argument("audit tolerance must be > 0");
  if (config.recordEvery < 0) throw std::invalid_argument("record_every must be >= 0");
  if (!(config.emptyThreshold >= 0.0)) throw std::invalid_argument("empty threshold must be >= 0");
}

bool hasOutgoing(const Network& network, std::size_t node, EdgeMode mode) {
  const auto& out = network.node(node).outgoing;
  return std::any_of(out.begin(), out.end(),
                     [&](std::size_t e) { return network.edge(e).mode == mode; });
}

}  // namespace

Simulation::Simulation(std::shared_ptr<const Network> network, TrafficModel model,
                       OccupancyDistribution occupancy, SimulationConfig config,
                       DemandSchedule demand, const std::map<std::string, double>& initialDensity)
    : network_(std::move(network)),
      model_(std::move(model)),
      occupancy_(std::move(occupancy)),
      config_(config),
      demand_(std::move(demand)) {
  if (!network_) throw std::invalid_argument("simulation needs a network");
  checkConfig(config_);
  const auto& net = *network_;

  const auto unstable = stabilityCheck(net, model_.walkway, model_.street, config_.dt);
  if (!unstable.empty()) {
    std::ostringstream msg;
    msg << "unstable timestep:";
    for (const auto& v : unstable) msg << "\n  " << v.subject << ": " << v.message;
    throw StabilityError(msg.str());
  }

  std::stable_sort(demand_.begin(), demand_.end(),
                   [](const DemandEntry& a, const DemandEntry& b) { return a.node < b.node; });
  for (const auto& entry : demand_) {
    const auto node = net.nodeIndex(entry.node);
    if (!node) throw std::invalid_argument("demand references unknown node '" + entry.node + "'");
    if (net.node(*node).kind != NodeKind::Entry) {
      throw std::invalid_argument("demand node '" + entry.node + "' is not an entry node");
    }
    if (!(entry.amount >= 0.0) || !std::isfinite(entry.amount)) {
      throw std::invalid_argument("demand amount must be finite and non-negative");
    }
    if (!(entry.start <= entry.end)) throw std::invalid_argument("demand window is reversed");
    const auto mode = entry.kind == SubjectKind::Car ? EdgeMode::Street : EdgeMode::Walkway;
    if (!hasOutgoing(net, *node, mode)) {
      throw std::invalid_argument("entry node '" + entry.node + "' has no outgoing " +
                                  std::string(toString(mode)) + " edge for its demand");
    }
    demandNodes_.push_back(*node);
  }

  const std::size_t pedClasses = model_.walkway.classes.classCount();
  const std::size_t carClasses = model_.street.classes.classCount();
  for (const auto& edge : net.edges()) {
    const bool street = edge.mode == EdgeMode::Street;
    state_.edges.push_back(EdgeState::make(edge.grid, street ? carClasses : pedClasses, edge.dx,
                                           config_.alpha, street));
  }
  for (const auto& [id, rho] : initialDensity) {
    const auto e = net.edgeIndex(id);
    if (!e) throw std::invalid_argument("initial density for unknown edge '" + id + "'");
    const auto& mode = model_.forMode(net.edge(*e).mode);
    if (!(rho >= 0.0) || rho > mode.rhoMax()) {
      throw std::invalid_argument("initial density for '" + id + "' outside [0, rho_max]");
    }
    const auto classes = partitionClasses(rho, mode.classes);
    if (net.edge(*e).mode == EdgeMode::Street) {
      std::vector<double> riders;
      for (double c : classes) riders.push_back(c * occupancy_.mean());
      state_.edges[*e].fillInterior(classes, riders);
    } else {
      state_.edges[*e].fillInterior(classes);
    }
  }
  state_.nodes.assign(net.nodes().size(), NodeState{NodeBuffer::make(pedClasses, carClasses)});
  state_.rng.seed(config_.seed);
  state_.demand.assign(demand_.size(), DemandCursor{});
  state_.initialPersons = auditPeople(net, state_.edges, state_.nodes).totalPersons;
  if (config_.distributor == DistributorKind::Dijkstra) refreshRouting(true);

  archive_.dt = config_.dt;
  archive_.initialPersons = state_.initialPersons;
  for (std::size_t e = 0; e < net.edges().size(); ++e) {
    archive_.edgeIds.push_back(net.edge(e).id);
    archive_.grids.push_back(net.edge(e).grid);
    archive_.edgeClasses.push_back(state_.edges[e].classes);
    archive_.maxClasses = std::max(archive_.maxClasses, state_.edges[e].classes);
  }
  for (const auto& node : net.nodes()) archive_.nodeIds.push_back(node.id);
}

TransferContext Simulation::context() {
  return TransferContext{*network_, model_, state_.edges, state_.nodes, config_.finiteNodes};
}

void Simulation::refreshRouting(bool force) {
  auto weights = edgeWeights(*network_, state_.edges, model_.walkway, model_.street,
                             config_.routingDensity);
  bool transition = state_.weights.size() != weights.size();
  for (std::size_t e = 0; !transition && e < weights.size(); ++e) {
    transition = weights[e].closed != state_.weights[e].closed;
  }
  const bool due = state_.step - state_.lastRoutingStep >= config_.routingCadence;
  if (force || transition || due) {
    state_.routes = shortestPathsToExits(*network_, weights);
    state_.lastRoutingStep = state_.step;
  }
  state_.weights = std::move(weights);
}

void Simulation::noteEvent(const std::string& kind, const std::string& subject) {
  const auto key = std::make_pair(kind, subject);
  const auto found = eventIndex_.find(key);
  if (found == eventIndex_.end()) {
    eventIndex_.emplace(key, archive_.events.size());
    archive_.events.push_back({kind, subject, state_.step, state_.step, 1});
  } else {
    auto& ev = archive_.events[found->second];
    ev.lastStep = state_.step;
    ++ev.count;
  }
}

void Simulation::step() {
  const auto& net = *network_;
  const double dt = config_.dt;
  const double t = static_cast<double>(state_.step) * dt;
  auto ctx = context();

  for (std::size_t i = 0; i < demand_.size(); ++i) {
    const double persons = injectDemand(state_.nodes[demandNodes_[i]], demand_[i],
                                        state_.demand[i], model_, occupancy_, state_.rng, t, dt);
    state_.injected += persons;
    state_.entryTimeSum += persons * t;
  }

  for (std::size_t e = 0; e < net.edges().size(); ++e) {
    const auto report = traverseEdge(ctx, e, dt);
    const double width = net.edge(e).width;
    state_.clampSlack += net.edge(e).mode == EdgeMode::Walkway
                             ? report.solve.clampedMass * width
                             : report.solve.clampedRiderMass * width;
    if (report.solve.jammed) noteEvent("jam", net.edge(e).id);
  }

  for (std::size_t n = 0; n < net.nodes().size(); ++n) {
    if (net.node(n).kind == NodeKind::Parking) {
      transformAtParking(state_.nodes[n], model_, occupancy_, state_.rng);
    }
  }

  const double exitTime = t + dt;
  for (std::size_t n = 0; n < net.nodes().size(); ++n) {
    if (net.node(n).kind != NodeKind::Exit) continue;
    auto& node = state_.nodes[n];
    const double persons = node.buffer.persons();
    if (persons > 0.0) {
      state_.exited += persons;
      state_.exitTimeSum += persons * exitTime;
    }
    node.buffer = NodeBuffer::make(model_.walkway.classes.classCount(),
                                   model_.street.classes.classCount());
    node.isFull = false;
  }

  if (config_.distributor == DistributorKind::Dijkstra) refreshRouting(false);

  for (std::size_t n = 0; n < net.nodes().size(); ++n) {
    if (net.node(n).kind == NodeKind::Exit) continue;
    if (config_.distributor == DistributorKind::Fixed) {
      distributeFixed(ctx, n);
    } else {
      const auto result = distributeRouted(ctx, n, state_.routes, state_.weights);
      if (result.routesClosed) noteEvent("routes_closed", net.node(n).id);
    }
  }

  ++state_.step;

  for (std::size_t e = 0; e < net.edges().size(); ++e) {
    const auto& s = state_.edges[e];
    for (std::size_t k = 0; k < s.classes; ++k) {
      if (s.at(k, s.grid.upstreamGhost) != 0.0 || s.at(k, s.grid.downstreamGhost) != 0.0) {
        throw SimulationError("ghost cell of edge '" + net.edge(e).id + "' holds density");
      }
    }
  }

  auto record = audit();
  const bool drifted = record.drift > config_.auditTolerance;
  archive_.audits.push_back(record);
  if (state_.step % config_.effectiveRecordEvery() == 0) {
    DensitySnapshot snap{state_.step, static_cast<double>(state_.step) * dt, {}};
    for (const auto& s : state_.edges) snap.edges.push_back(s.density);
    archive_.snapshots.push_back(std::move(snap));
  }
  if (drifted) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "mass audit drifted by " << record.drift << " (tolerance " << config_.auditTolerance
        << ") at step " << state_.step;
    throw AuditDriftError(msg.str());
  }
}

AuditRecord Simulation::audit() const {
  auto record = auditPeople(*network_, state_.edges, state_.nodes);
  record.step = state_.step;
  record.time = static_cast<double>(state_.step) * config_.dt;
  record.injectedToDate = state_.injected;
  record.exitedToDate = state_.exited;
  const double expected =
      state_.initialPersons + state_.injected + state_.clampSlack - state_.exited;
  const double scale = state_.initialPersons + state_.injected;
  const double gap = std::abs(record.totalPersons - expected);
  record.drift = scale > 0.0 ? gap / scale : gap;
  return record;
}

bool Simulation::demandPending(double t) const {
  for (std::size_t i = 0; i < demand_.size(); ++i) {
    const auto& entry = demand_[i];
    if (entry.amount <= 0.0) continue;
    if (entry.oneShot ? !state_.demand[i].fired : t < entry.end) return true;
  }
  return false;
}

bool Simulation::finished() const {
  const double t = static_cast<double>(state_.step) * config_.dt;
  if (demandPending(t)) return false;
  return auditPeople(*network_, state_.edges, state_.nodes).totalPersons <= config_.emptyThreshold;
}

ResultArchive Simulation::run() {
  archive_.termination = TerminationReason::MaxSteps;
  try {
    while (true) {
      if (finished()) {
        archive_.termination = TerminationReason::Empty;
        break;
      }
      if (state_.step >= config_.maxSteps) break;
      step();
    }
  } catch (const SimulationError& err) {
    archive_.termination = TerminationReason::Aborted;
    archive_.message = err.what();
  }
  archive_.stepsRun = state_.step;
  archive_.injectedPersons = state_.injected;
  archive_.exitedPersons = state_.exited;
  archive_.remainingPersons = auditPeople(*network_, state_.edges, state_.nodes).totalPersons;
  archive_.entryTimeSum = state_.entryTimeSum;
  archive_.exitTimeSum = state_.exitTimeSum;
  return archive_;
}

ResultArchive runSimulation(std::shared_ptr<const Network> network, const TrafficModel& model,
                            const OccupancyDistribution& occupancy, const SimulationConfig& config,
                            const DemandSchedule& demand,
                            const std::map<std::string, double>& initialDensity) {
  Simulation sim(std::move(network), model, occupancy, config, demand, initialDensity);
  return sim.run();
}

}  // namespace hybridflow
