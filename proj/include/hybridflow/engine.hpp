#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hybridflow/edge_solver.hpp"
#include "hybridflow/network.hpp"
#include "hybridflow/node_transfer.hpp"
#include "hybridflow/occupancy.hpp"
#include "hybridflow/routing.hpp"
#include "hybridflow/traffic_model.hpp"

namespace hybridflow {

enum class SubjectKind { Pedestrian, Car };
enum class DistributorKind { Fixed, Dijkstra };

/// One source of people or cars at an entry node. One-shot entries drop
/// `amount` subjects when the clock first reaches `start`; rate entries add
/// `amount` subjects per second while start <= t < end.
struct DemandEntry {
  std::string node;
  SubjectKind kind = SubjectKind::Pedestrian;
  bool oneShot = true;
  double amount = 0.0;
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();

  bool operator==(const DemandEntry&) const = default;
};

using DemandSchedule = std::vector<DemandEntry>;

struct SimulationConfig {
  double dt = 0.002;
  std::int64_t maxSteps = 10000;
  double alpha = 1.0;
  DistributorKind distributor = DistributorKind::Fixed;
  std::uint64_t seed = 0;
  std::int64_t routingCadence = 10;
  double auditTolerance = 1e-9;
  bool finiteNodes = true;
  /// Density snapshot cadence in steps; 0 picks one from maxSteps.
  std::int64_t recordEvery = 0;
  DensityStatistic routingDensity = DensityStatistic::Mean;
  /// Persons below which the network counts as empty.
  double emptyThreshold = 1e-9;

  std::int64_t effectiveRecordEvery() const;
  bool operator==(const SimulationConfig&) const = default;
};

/// Person count by location after a step, plus the running ledger.
struct AuditRecord {
  std::int64_t step = 0;
  double time = 0.0;
  double totalPersons = 0.0;
  std::vector<double> edgePersons;
  std::vector<double> nodePersons;
  double injectedToDate = 0.0;
  double exitedToDate = 0.0;
  /// |in-system + exited - injected - initial - clamp slack| / scale.
  double drift = 0.0;
};

/// Persons on edges (walkway area-weighted densities, street passenger fields)
/// and in node buffers.
AuditRecord auditPeople(const Network& network, std::span<const EdgeState> edges,
                        std::span<const NodeState> nodes);

struct DemandCursor {
  CarAssembler assembler;
  bool fired = false;

  bool operator==(const DemandCursor&) const = default;
};

/// Adds this step's share of `entry` to the entry node buffer and returns the
/// persons injected.
double injectDemand(NodeState& node, const DemandEntry& entry, DemandCursor& cursor,
                    const TrafficModel& model, const OccupancyDistribution& occupancy, Rng& rng,
                    double t, double dt);

struct DensitySnapshot {
  std::int64_t step = 0;
  double time = 0.0;
  std::vector<std::vector<double>> edges;
};

struct EventRecord {
  std::string kind;
  std::string subject;
  std::int64_t firstStep = 0;
  std::int64_t lastStep = 0;
  std::int64_t count = 0;
};

enum class TerminationReason { Empty, MaxSteps, Aborted };
std::string_view toString(TerminationReason reason);

struct ResultArchive {
  std::vector<std::string> edgeIds;
  std::vector<std::string> nodeIds;
  std::vector<CellGrid> grids;
  std::vector<std::size_t> edgeClasses;
  std::size_t maxClasses = 0;
  double dt = 0.0;

  std::vector<DensitySnapshot> snapshots;
  std::vector<AuditRecord> audits;
  std::vector<EventRecord> events;

  TerminationReason termination = TerminationReason::MaxSteps;
  std::string message;
  std::int64_t stepsRun = 0;

  double initialPersons = 0.0;
  double injectedPersons = 0.0;
  double exitedPersons = 0.0;
  double remainingPersons = 0.0;
  /// Person-weighted sums of entry and exit times (s); initial population enters at 0.
  double entryTimeSum = 0.0;
  double exitTimeSum = 0.0;

  bool aborted() const { return termination == TerminationReason::Aborted; }
};

/// Complete mutable engine state; copying it and restoring later replays
/// identically.
struct SimulationState {
  std::int64_t step = 0;
  std::vector<EdgeState> edges;
  std::vector<NodeState> nodes;
  Rng rng;
  std::vector<DemandCursor> demand;
  double initialPersons = 0.0;
  double injected = 0.0;
  double exited = 0.0;
  double clampSlack = 0.0;
  double entryTimeSum = 0.0;
  double exitTimeSum = 0.0;
  RoutingTable routes;
  std::vector<EdgeWeight> weights;
  std::int64_t lastRoutingStep = -1;
};

class Simulation {
 public:
  /// Throws StabilityError when dt violates the CFL bound on any edge.
  Simulation(std::shared_ptr<const Network> network, TrafficModel model,
             OccupancyDistribution occupancy, SimulationConfig config, DemandSchedule demand,
             const std::map<std::string, double>& initialDensity = {});

  /// Advances one timestep. Throws SimulationError subclasses on failures.
  void step();
  /// No pending demand and fewer than emptyThreshold persons in the system.
  bool finished() const;
  /// Steps until finished or maxSteps, catching run errors into the archive.
  ResultArchive run();

  AuditRecord audit() const;
  const SimulationState& state() const { return state_; }
  void restore(const SimulationState& snapshot) { state_ = snapshot; }
  const ResultArchive& archive() const { return archive_; }
  const Network& network() const { return *network_; }
  const TrafficModel& model() const { return model_; }
  const SimulationConfig& config() const { return config_; }

 private:
  TransferContext context();
  void refreshRouting(bool force);
  void noteEvent(const std::string& kind, const std::string& subject);
  bool demandPending(double t) const;

  std::shared_ptr<const Network> network_;
  TrafficModel model_;
  OccupancyDistribution occupancy_;
  SimulationConfig config_;
  DemandSchedule demand_;
  std::vector<std::size_t> demandNodes_;
  SimulationState state_;
  ResultArchive archive_;
  std::map<std::pair<std::string, std::string>, std::size_t> eventIndex_;
};

/// Builds a Simulation and runs it to completion.
ResultArchive runSimulation(std::shared_ptr<const Network> network, const TrafficModel& model,
                            const OccupancyDistribution& occupancy, const SimulationConfig& config,
                            const DemandSchedule& demand,
                            const std::map<std::string, double>& initialDensity = {});

}  // namespace hybridflow
