#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hybridflow/edge_solver.hpp"
#include "hybridflow/fundamental_diagram.hpp"
#include "hybridflow/network.hpp"

namespace hybridflow {

/// Travel time over an edge in seconds, or closed when the edge is jammed.
struct EdgeWeight {
  double value = 0.0;
  bool closed = false;

  static EdgeWeight open(double seconds) { return {seconds, false}; }
  static EdgeWeight closedEdge() { return {std::numeric_limits<double>::infinity(), true}; }
  bool operator==(const EdgeWeight&) const = default;
};

/// Which density summarises an edge for routing.
enum class DensityStatistic { Mean, Max };

/// length / v(mean vff; rho_bar); closed once rho_bar reaches rho_max.
EdgeWeight edgeWeight(const Edge& edge, const EdgeState& state, const ModeModel& model,
                      DensityStatistic statistic = DensityStatistic::Mean);

std::vector<EdgeWeight> edgeWeights(const Network& network, std::span<const EdgeState> states,
                                    const ModeModel& walkway, const ModeModel& street,
                                    DensityStatistic statistic = DensityStatistic::Mean);

/// Mode of a population leaving node `node` after arriving by `arrival`.
/// Parking nodes swap cars and pedestrians; every other node keeps the mode.
EdgeMode departureMode(const Network& network, std::size_t node, EdgeMode arrival);

/// Shortest travel times towards a destination set. Entries are keyed by
/// (node, mode of the population waiting there) because a parking node
/// changes the mode a route continues with.
class RoutingTable {
 public:
  static constexpr double kUnreachable = std::numeric_limits<double>::infinity();

  RoutingTable() = default;
  RoutingTable(std::vector<std::size_t> destinations, std::size_t nodeCount);

  const std::vector<std::size_t>& destinations() const { return destinations_; }
  double cost(std::size_t node, EdgeMode mode) const { return cost_[slot(mode)][node]; }
  std::optional<std::size_t> nextEdge(std::size_t node, EdgeMode mode) const;
  bool reachable(std::size_t node, EdgeMode mode) const { return cost(node, mode) < kUnreachable; }

  void set(std::size_t node, EdgeMode mode, double cost, std::optional<std::size_t> edge);

 private:
  static std::size_t slot(EdgeMode mode) { return mode == EdgeMode::Walkway ? 0 : 1; }

  std::vector<std::size_t> destinations_;
  std::array<std::vector<double>, 2> cost_;
  std::array<std::vector<std::size_t>, 2> next_;
};

/// Dijkstra on the reversed network. Closed edges are skipped; ties go to the
/// lowest edge index (ascending edge id). Throws std::out_of_range for an
/// unknown destination.
RoutingTable shortestPaths(const Network& network, std::span<const EdgeWeight> weights,
                           std::span<const std::size_t> destinations);
RoutingTable shortestPaths(const Network& network, std::span<const EdgeWeight> weights,
                           std::size_t destination);
RoutingTable shortestPaths(const Network& network, std::span<const EdgeWeight> weights,
                           std::string_view destinationId);
/// Routes towards whichever exit node is closest.
RoutingTable shortestPathsToExits(const Network& network, std::span<const EdgeWeight> weights);

}  // namespace hybridflow
