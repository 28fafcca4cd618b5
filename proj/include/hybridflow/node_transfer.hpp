#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hybridflow/edge_solver.hpp"
#include "hybridflow/network.hpp"
#include "hybridflow/occupancy.hpp"
#include "hybridflow/routing.hpp"
#include "hybridflow/traffic_model.hpp"

namespace hybridflow {

/// Pedestrians waiting in a node, per velocity class.
struct PedestrianPool {
  std::vector<double> persons;

  double total() const;
  /// Class proportions; empty pool yields all zeros.
  std::vector<double> mix() const;
};

/// Cars waiting in a node, per velocity class, with the persons they carry.
struct CarPool {
  std::vector<double> cars;
  std::vector<double> persons;

  double totalCars() const;
  double totalPersons() const;
  void clear();
};

/// Population held inside a node between edge exits and edge starts.
struct NodeBuffer {
  PedestrianPool pedestrians;
  CarPool cars;
  /// Parking only: cars that arrived this step and have not parked yet.
  CarPool arrivingCars;
  /// Parking only: persons that arrived on foot and wait to fill a car.
  double waitingRiders = 0.0;

  static NodeBuffer make(std::size_t pedestrianClasses, std::size_t carClasses);
  /// Every person held, counting car occupants.
  double persons() const;
  bool empty() const { return persons() <= 0.0 && cars.totalCars() <= 0.0; }
};

struct NodeState {
  NodeBuffer buffer;
  bool isFull = false;
  /// Size of the next car group to form at a parking node; 0 means unsampled.
  int nextGroupSize = 0;
};

/// Everything the transfer phase reads and mutates.
struct TransferContext {
  const Network& network;
  const TrafficModel& model;
  std::vector<EdgeState>& edges;
  std::vector<NodeState>& nodes;
  /// Finite nodes block incoming edges when they cannot empty their buffer.
  bool finiteNodes = true;
};

/// Moves the end cell of an edge into its head node's buffer. Returns the
/// number of persons moved.
double harvestEndCell(TransferContext& ctx, std::size_t edge);

struct TraverseReport {
  StepReport solve;
  double harvestedPersons = 0.0;
};

/// Harvest, solve, harvest when the end node accepts people; solve only when
/// the end node is full.
TraverseReport traverseEdge(TransferContext& ctx, std::size_t edge, double dt);

struct DistributionResult {
  double pedestrianFriction = 1.0;
  double carFriction = 1.0;
  bool placedAll = true;
  /// Routed distribution found no open edge for a waiting population.
  bool routesClosed = false;
};

/// Same density on every mode-compatible outgoing edge (width-proportional
/// counts), or the node's configured shares. Throws RoutingDeadEndError when
/// a waiting population has no compatible outgoing edge.
DistributionResult distributeFixed(TransferContext& ctx, std::size_t node);

/// Sends each waiting population along the next edge of its shortest route,
/// falling back to the best open alternative when that edge has closed.
DistributionResult distributeRouted(TransferContext& ctx, std::size_t node,
                                    const RoutingTable& routes,
                                    std::span<const EdgeWeight> weights);

/// true: incoming edges without a queue get one full cell. false: all
/// incoming queues are released.
void setFull(TransferContext& ctx, std::size_t node, bool full);

struct TransformReport {
  double carsParked = 0.0;
  double personsReleased = 0.0;
  double personsBoarded = 0.0;
  int carsFormed = 0;
};

/// Parks arriving cars (their occupants join the pedestrian pool, split into
/// velocity classes) and groups waiting riders into whole cars whose size is
/// drawn from the occupancy distribution.
TransformReport transformAtParking(NodeState& node, const TrafficModel& model,
                                   const OccupancyDistribution& occupancy, Rng& rng);

/// Turns a stream of fractional car amounts into parcels whose occupancy is
/// sampled once per whole car; a partly filled car keeps its occupancy until
/// the next amount completes it.
class CarAssembler {
 public:
  struct Parcel {
    double cars = 0.0;
    double persons = 0.0;
  };

  Parcel add(double cars, Rng& rng, const OccupancyDistribution& occupancy);

  bool operator==(const CarAssembler&) const = default;

 private:
  int occupancy_ = 0;
  double filled_ = 0.0;
};

}  // namespace hybridflow
