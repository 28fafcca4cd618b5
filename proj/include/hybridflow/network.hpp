#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hybridflow {

enum class NodeKind { Entry, Exit, Parking, Junction };
enum class EdgeMode { Walkway, Street };

std::string_view toString(NodeKind kind);
std::string_view toString(EdgeMode mode);
std::optional<NodeKind> parseNodeKind(std::string_view text);
std::optional<EdgeMode> parseEdgeMode(std::string_view text);

inline EdgeMode otherMode(EdgeMode mode) {
  return mode == EdgeMode::Walkway ? EdgeMode::Street : EdgeMode::Walkway;
}

/// Raw, unvalidated node as it appears in a scenario.
struct NodeDef {
  std::string id;
  NodeKind kind = NodeKind::Junction;
  /// Optional fixed-distributor shares keyed by outgoing edge id.
  std::map<std::string, double> distributorWeights;

  bool operator==(const NodeDef&) const = default;
};

/// Raw, unvalidated edge. `width` is metres for walkways and a lane
/// multiplicity for streets.
struct EdgeDef {
  std::string id;
  EdgeMode mode = EdgeMode::Walkway;
  std::string from;
  std::string to;
  double length = 0.0;
  double width = 1.0;
  double dx = 0.0;

  bool operator==(const EdgeDef&) const = default;
};

struct NetworkDescription {
  std::vector<NodeDef> nodes;
  std::vector<EdgeDef> edges;

  bool operator==(const NetworkDescription&) const = default;
};

struct Violation {
  std::string subject;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Index layout of an edge's cells: ghost 0, start 1, end N-2, ghost N-1.
struct CellGrid {
  std::size_t cells = 0;
  std::size_t start = 1;
  std::size_t end = 0;
  std::size_t upstreamGhost = 0;
  std::size_t downstreamGhost = 0;

  std::size_t interiorCells() const { return cells - 2; }
  bool operator==(const CellGrid&) const = default;
};

/// Cell count N = round(length / dx) + 2. Throws std::invalid_argument when
/// the parameters are non-positive or N < 4.
CellGrid buildCellGrid(double length, double dx);
CellGrid buildCellGrid(const EdgeDef& edge);

/// Checks every structural invariant and returns all violations found.
/// An empty report means the description can be turned into a Network.
std::vector<Violation> validateNetwork(const NetworkDescription& description);

class NetworkError : public std::runtime_error {
 public:
  explicit NetworkError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct Edge {
  std::string id;
  EdgeMode mode;
  std::size_t tail;
  std::size_t head;
  double length;
  double width;
  double dx;
  CellGrid grid;
};

struct Node {
  std::string id;
  NodeKind kind;
  std::vector<std::size_t> incoming;
  std::vector<std::size_t> outgoing;
  /// Share per outgoing edge (aligned with `outgoing`); empty means width-proportional.
  std::vector<double> distributorWeights;
};

/// Immutable validated network. Nodes and edges are stored sorted by id, so
/// index order is the deterministic processing order everywhere.
class Network {
 public:
  /// Throws NetworkError listing every violation.
  static Network build(const NetworkDescription& description);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(std::size_t index) const { return nodes_.at(index); }
  const Edge& edge(std::size_t index) const { return edges_.at(index); }

  std::optional<std::size_t> nodeIndex(std::string_view id) const;
  std::optional<std::size_t> edgeIndex(std::string_view id) const;

 private:
  Network() = default;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

}  // namespace hybridflow
