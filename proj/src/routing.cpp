#include "hybridflow/routing.hpp"

#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>

namespace hybridflow {

namespace {

constexpr std::size_t kNoEdge = std::numeric_limits<std::size_t>::max();
constexpr double kClosedSlack = 1e-12;

}  // namespace

EdgeWeight edgeWeight(const Edge& edge, const EdgeState& state, const ModeModel& model,
                      DensityStatistic statistic) {
  const double rho = statistic == DensityStatistic::Mean ? state.meanInteriorDensity()
                                                         : state.maxInteriorDensity();
  const double rhoMax = model.rhoMax();
  if (rho >= rhoMax - kClosedSlack) return EdgeWeight::closedEdge();
  const double speed = model.diagram.velocity(model.meanFreeFlowSpeed(), rho);
  if (!(speed > 0.0)) return EdgeWeight::closedEdge();
  return EdgeWeight::open(edge.length / speed);
}

std::vector<EdgeWeight> edgeWeights(const Network& network, std::span<const EdgeState> states,
                                    const ModeModel& walkway, const ModeModel& street,
                                    DensityStatistic statistic) {
  std::vector<EdgeWeight> weights;
  weights.reserve(network.edges().size());
  for (std::size_t e = 0; e < network.edges().size(); ++e) {
    const auto& edge = network.edge(e);
    weights.push_back(edgeWeight(edge, states[e],
                                 edge.mode == EdgeMode::Walkway ? walkway : street, statistic));
  }
  return weights;
}

EdgeMode departureMode(const Network& network, std::size_t node, EdgeMode arrival) {
  return network.node(node).kind == NodeKind::Parking ? otherMode(arrival) : arrival;
}

RoutingTable::RoutingTable(std::vector<std::size_t> destinations, std::size_t nodeCount)
    : destinations_(std::move(destinations)) {
  for (auto& c : cost_) c.assign(nodeCount, kUnreachable);
  for (auto& n : next_) n.assign(nodeCount, kNoEdge);
}

std::optional<std::size_t> RoutingTable::nextEdge(std::size_t node, EdgeMode mode) const {
  const auto e = next_[slot(mode)][node];
  if (e == kNoEdge) return std::nullopt;
  return e;
}

void RoutingTable::set(std::size_t node, EdgeMode mode, double cost,
                       std::optional<std::size_t> edge) {
  cost_[slot(mode)][node] = cost;
  next_[slot(mode)][node] = edge.value_or(kNoEdge);
}

RoutingTable shortestPaths(const Network& network, std::span<const EdgeWeight> weights,
                           std::span<const std::size_t> destinations) {
  const std::size_t n = network.nodes().size();
  if (weights.size() != network.edges().size()) {
    throw std::invalid_argument("one weight per edge required");
  }
  for (auto d : destinations) {
    if (d >= n) throw std::out_of_range("destination node index out of range");
  }
  RoutingTable table({destinations.begin(), destinations.end()}, n);

  // State = (cost, mode, node); modes are both walkway and street because a
  // destination absorbs either.
  using Entry = std::tuple<double, int, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  const EdgeMode modes[] = {EdgeMode::Walkway, EdgeMode::Street};
  for (auto d : destinations) {
    for (int m = 0; m < 2; ++m) {
      table.set(d, modes[m], 0.0, std::nullopt);
      frontier.emplace(0.0, m, d);
    }
  }

  while (!frontier.empty()) {
    const auto [c, m, v] = frontier.top();
    frontier.pop();
    if (c > table.cost(v, modes[m])) continue;
    for (auto e : network.node(v).incoming) {
      const auto& edge = network.edge(e);
      if (weights[e].closed) continue;
      if (departureMode(network, v, edge.mode) != modes[m]) continue;
      const double candidate = c + weights[e].value;
      const std::size_t u = edge.tail;
      const double current = table.cost(u, edge.mode);
      const auto currentEdge = table.nextEdge(u, edge.mode);
      if (candidate < current ||
          (candidate == current && currentEdge && e < *currentEdge)) {
        table.set(u, edge.mode, candidate, e);
        if (candidate < current) frontier.emplace(candidate, edge.mode == EdgeMode::Walkway ? 0 : 1, u);
      }
    }
  }
  return table;
}

RoutingTable shortestPaths(const Network& network, std::span<const EdgeWeight> weights,
                           std::size_t destination) {
  const std::size_t dest[] = {destination};
  return shortestPaths(network, weights, dest);
}

RoutingTable shortestPaths(const Network& network, std::span<const EdgeWeight> weights,
                           std::string_view destinationId) {
  const auto index = network.nodeIndex(destinationId);
  if (!index) throw std::out_of_range("unknown destination node '" + std::string(destinationId) + "'");
  return shortestPaths(network, weights, *index);
}

RoutingTable shortestPathsToExits(const Network& network, std::span<const EdgeWeight> weights) {
  std::vector<std::size_t> exits;
  for (std::size_t i = 0; i < network.nodes().size(); ++i) {
    if (network.node(i).kind == NodeKind::Exit) exits.push_back(i);
  }
  return shortestPaths(network, weights, exits);
}

}  // namespace hybridflow
