#include "hybridflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace hybridflow {

std::string_view toString(NodeKind kind) {
  switch (kind) {
    case NodeKind::Entry: return "entry";
    case NodeKind::Exit: return "exit";
    case NodeKind::Parking: return "parking";
    case NodeKind::Junction: return "junction";
  }
  return "junction";
}

std::string_view toString(EdgeMode mode) {
  return mode == EdgeMode::Walkway ? "walkway" : "street";
}

std::optional<NodeKind> parseNodeKind(std::string_view text) {
  if (text == "entry") return NodeKind::Entry;
  if (text == "exit") return NodeKind::Exit;
  if (text == "parking") return NodeKind::Parking;
  if (text == "junction") return NodeKind::Junction;
  return std::nullopt;
}

std::optional<EdgeMode> parseEdgeMode(std::string_view text) {
  if (text == "walkway") return EdgeMode::Walkway;
  if (text == "street") return EdgeMode::Street;
  return std::nullopt;
}

CellGrid buildCellGrid(double length, double dx) {
  if (!(length > 0.0) || !(dx > 0.0)) {
    throw std::invalid_argument("edge length and dx must be positive");
  }
  const double ratio = std::round(length / dx);
  if (ratio > 1e9) throw std::invalid_argument("edge has too many cells");
  const auto cells = static_cast<std::size_t>(ratio) + 2;
  if (cells < 4) {
    std::ostringstream msg;
    msg << "edge grid needs at least 4 cells, got " << cells << " (length " << length << ", dx "
        << dx << ")";
    throw std::invalid_argument(msg.str());
  }
  return CellGrid{cells, 1, cells - 2, 0, cells - 1};
}

CellGrid buildCellGrid(const EdgeDef& edge) { return buildCellGrid(edge.length, edge.dx); }

namespace {

std::string joinViolations(const std::vector<Violation>& violations) {
  std::ostringstream out;
  out << "invalid network:";
  for (const auto& v : violations) out << "\n  " << v.subject << ": " << v.message;
  return out.str();
}

}  // namespace

NetworkError::NetworkError(std::vector<Violation> violations)
    : std::runtime_error(joinViolations(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validateNetwork(const NetworkDescription& description) {
  std::vector<Violation> report;
  auto add = [&report](const std::string& subject, std::string message) {
    report.push_back({subject, std::move(message)});
  };

  std::unordered_map<std::string, std::size_t> nodeById;
  for (std::size_t i = 0; i < description.nodes.size(); ++i) {
    const auto& node = description.nodes[i];
    if (node.id.empty()) add("<node #" + std::to_string(i) + ">", "empty node id");
    if (!nodeById.emplace(node.id, i).second) add(node.id, "duplicate node id");
  }
  std::set<std::string> edgeIds;
  for (const auto& edge : description.edges) {
    if (edge.id.empty()) add("<edge>", "empty edge id");
    if (!edgeIds.insert(edge.id).second) add(edge.id, "duplicate edge id");
  }

  struct Incidence {
    std::vector<std::size_t> in;
    std::vector<std::size_t> out;
  };
  std::vector<Incidence> incidence(description.nodes.size());

  for (std::size_t e = 0; e < description.edges.size(); ++e) {
    const auto& edge = description.edges[e];
    const auto tail = nodeById.find(edge.from);
    const auto head = nodeById.find(edge.to);
    if (tail == nodeById.end()) add(edge.id, "tail references unknown node '" + edge.from + "'");
    if (head == nodeById.end()) add(edge.id, "head references unknown node '" + edge.to + "'");
    if (tail != nodeById.end() && head != nodeById.end() && tail->second == head->second) {
      add(edge.id, "self-loop edges are not allowed");
    }
    bool geometryOk = true;
    if (!(edge.length > 0.0)) add(edge.id, "length must be positive"), geometryOk = false;
    if (!(edge.width > 0.0)) add(edge.id, "width must be positive");
    if (!(edge.dx > 0.0)) add(edge.id, "dx must be positive"), geometryOk = false;
    if (geometryOk) {
      if (edge.dx > edge.length) add(edge.id, "dx exceeds edge length");
      try {
        buildCellGrid(edge);
      } catch (const std::invalid_argument& err) {
        add(edge.id, err.what());
      }
    }
    if (tail != nodeById.end()) incidence[tail->second].out.push_back(e);
    if (head != nodeById.end()) incidence[head->second].in.push_back(e);
  }

  for (std::size_t i = 0; i < description.nodes.size(); ++i) {
    const auto& node = description.nodes[i];
    const auto& inc = incidence[i];
    bool hasStreet = false;
    bool hasWalkway = false;
    for (auto list : {&inc.in, &inc.out}) {
      for (auto e : *list) {
        (description.edges[e].mode == EdgeMode::Street ? hasStreet : hasWalkway) = true;
      }
    }
    switch (node.kind) {
      case NodeKind::Entry:
        if (!inc.in.empty()) add(node.id, "entry node has incoming edges");
        if (inc.out.empty()) add(node.id, "entry node has no outgoing edge");
        break;
      case NodeKind::Exit:
        if (!inc.out.empty()) add(node.id, "exit node has outgoing edges");
        if (inc.in.empty()) add(node.id, "exit node has no incoming edge");
        break;
      case NodeKind::Parking:
        if (!hasStreet || !hasWalkway) {
          add(node.id, "parking node needs at least one street and one walkway edge");
        }
        break;
      case NodeKind::Junction:
        if (hasStreet && hasWalkway) add(node.id, "junction mixes street and walkway edges");
        break;
    }
    for (const auto& [edgeId, weight] : node.distributorWeights) {
      const bool outgoing = std::any_of(inc.out.begin(), inc.out.end(), [&](std::size_t e) {
        return description.edges[e].id == edgeId;
      });
      if (!outgoing) add(node.id, "distributor weight for non-outgoing edge '" + edgeId + "'");
      if (!(weight > 0.0)) add(node.id, "distributor weight for '" + edgeId + "' must be positive");
    }
    if (!node.distributorWeights.empty()) {
      for (auto e : inc.out) {
        if (!node.distributorWeights.contains(description.edges[e].id)) {
          add(node.id, "distributor weights missing outgoing edge '" + description.edges[e].id + "'");
        }
      }
    }
  }

  // Reachability: every entry must reach some exit along directed edges.
  std::vector<bool> reachesExit(description.nodes.size(), false);
  std::queue<std::size_t> frontier;
  for (std::size_t i = 0; i < description.nodes.size(); ++i) {
    if (description.nodes[i].kind == NodeKind::Exit && nodeById.at(description.nodes[i].id) == i) {
      reachesExit[i] = true;
      frontier.push(i);
    }
  }
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    for (auto e : incidence[v].in) {
      const auto tail = nodeById.find(description.edges[e].from);
      if (tail != nodeById.end() && !reachesExit[tail->second]) {
        reachesExit[tail->second] = true;
        frontier.push(tail->second);
      }
    }
  }
  for (std::size_t i = 0; i < description.nodes.size(); ++i) {
    if (description.nodes[i].kind == NodeKind::Entry && nodeById.at(description.nodes[i].id) == i &&
        !reachesExit[i]) {
      add(description.nodes[i].id, "entry node has no path to an exit node");
    }
  }
  return report;
}

Network Network::build(const NetworkDescription& description) {
  auto violations = validateNetwork(description);
  if (!violations.empty()) throw NetworkError(std::move(violations));

  std::vector<NodeDef> nodeDefs = description.nodes;
  std::vector<EdgeDef> edgeDefs = description.edges;
  std::sort(nodeDefs.begin(), nodeDefs.end(),
            [](const NodeDef& a, const NodeDef& b) { return a.id < b.id; });
  std::sort(edgeDefs.begin(), edgeDefs.end(),
            [](const EdgeDef& a, const EdgeDef& b) { return a.id < b.id; });

  Network net;
  std::unordered_map<std::string, std::size_t> nodeIndex;
  for (std::size_t i = 0; i < nodeDefs.size(); ++i) {
    nodeIndex.emplace(nodeDefs[i].id, i);
    net.nodes_.push_back(Node{nodeDefs[i].id, nodeDefs[i].kind, {}, {}, {}});
  }
  for (std::size_t e = 0; e < edgeDefs.size(); ++e) {
    const auto& def = edgeDefs[e];
    const auto tail = nodeIndex.at(def.from);
    const auto head = nodeIndex.at(def.to);
    net.edges_.push_back(
        Edge{def.id, def.mode, tail, head, def.length, def.width, def.dx, buildCellGrid(def)});
    net.nodes_[tail].outgoing.push_back(e);
    net.nodes_[head].incoming.push_back(e);
  }
  for (std::size_t i = 0; i < nodeDefs.size(); ++i) {
    const auto& weights = nodeDefs[i].distributorWeights;
    if (weights.empty()) continue;
    auto& node = net.nodes_[i];
    for (auto e : node.outgoing) node.distributorWeights.push_back(weights.at(net.edges_[e].id));
  }
  return net;
}

std::optional<std::size_t> Network::nodeIndex(std::string_view id) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                                   [](const Node& n, std::string_view key) { return n.id < key; });
  if (it == nodes_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::optional<std::size_t> Network::edgeIndex(std::string_view id) const {
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                                   [](const Edge& e, std::string_view key) { return e.id < key; });
  if (it == edges_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

}  // namespace hybridflow
