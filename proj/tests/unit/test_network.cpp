#include <doctest.h>

#include <cmath>
#include <random>

#include "hybridflow/network.hpp"
#include "test_support.hpp"

using namespace hybridflow;
using testsupport::NetBuilder;

namespace {

NetBuilder triangle() {
  NetBuilder b;
  b.node("E", NodeKind::Entry)
      .node("A", NodeKind::Junction)
      .node("B", NodeKind::Junction)
      .node("C", NodeKind::Junction)
      .node("X", NodeKind::Exit)
      .walk("in", "E", "A", 1, 1, 0.1)
      .walk("ab", "A", "B", 1, 1, 0.1)
      .walk("bc", "B", "C", 1, 1, 0.1)
      .walk("ca", "C", "A", 1, 1, 0.1)
      .walk("out", "C", "X", 1, 1, 0.1);
  return b;
}

bool mentions(const std::vector<Violation>& report, const std::string& subject) {
  for (const auto& v : report) {
    if (v.subject == subject) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("triangle of junction walkways with entry and exit is valid") {
  CHECK(validateNetwork(triangle().description()).empty());
}

TEST_CASE("exit node with an outgoing edge is named") {
  auto b = triangle();
  b.node("Y", NodeKind::Junction).walk("leak", "X", "Y", 1, 1, 0.1);
  const auto report = validateNetwork(b.description());
  CHECK(mentions(report, "X"));
  for (const auto& v : report) CHECK(v.subject != "leak");
}

TEST_CASE("dangling head reference names the edge") {
  auto b = triangle();
  b.walk("ghost", "A", "nowhere", 1, 1, 0.1);
  const auto report = validateNetwork(b.description());
  REQUIRE(report.size() == 1);
  CHECK(report[0].subject == "ghost");
}

TEST_CASE("structural violations are all reported") {
  SUBCASE("entry with incoming edge") {
    auto b = triangle();
    b.walk("back", "A", "E", 1, 1, 0.1);
    CHECK(mentions(validateNetwork(b.description()), "E"));
  }
  SUBCASE("junction mixing modes") {
    auto b = triangle();
    b.node("X2", NodeKind::Exit).street("s", "A", "X2", 10, 1, 1);
    CHECK(mentions(validateNetwork(b.description()), "A"));
  }
  SUBCASE("parking without a street") {
    NetBuilder b;
    b.node("E", NodeKind::Entry).node("P", NodeKind::Parking).node("X", NodeKind::Exit);
    b.walk("a", "E", "P", 1, 1, 0.1).walk("b", "P", "X", 1, 1, 0.1);
    CHECK(mentions(validateNetwork(b.description()), "P"));
  }
  SUBCASE("duplicate ids") {
    auto b = triangle();
    b.walk("ab", "B", "A", 1, 1, 0.1).node("A", NodeKind::Junction);
    const auto report = validateNetwork(b.description());
    CHECK(mentions(report, "ab"));
    CHECK(mentions(report, "A"));
  }
  SUBCASE("geometry") {
    NetBuilder b;
    b.node("E", NodeKind::Entry).node("X", NodeKind::Exit);
    b.walk("neg", "E", "X", -1, 1, 0.1).walk("wide", "E", "X", 1, 0, 0.1);
    b.walk("coarse", "E", "X", 1, 1, 2).walk("short", "E", "X", 1, 1, 0.9);
    const auto report = validateNetwork(b.description());
    CHECK(mentions(report, "neg"));
    CHECK(mentions(report, "wide"));
    CHECK(mentions(report, "coarse"));
    CHECK(mentions(report, "short"));
  }
  SUBCASE("entry cannot reach an exit") {
    NetBuilder b;
    b.node("E", NodeKind::Entry).node("A", NodeKind::Junction).node("X", NodeKind::Exit);
    b.node("F", NodeKind::Entry);
    b.walk("ea", "E", "A", 1, 1, 0.1).walk("ax", "A", "X", 1, 1, 0.1);
    b.node("B", NodeKind::Junction).node("C", NodeKind::Junction);
    b.walk("fb", "F", "B", 1, 1, 0.1).walk("bc", "B", "C", 1, 1, 0.1).walk("cb", "C", "B", 1, 1, 0.1);
    const auto report = validateNetwork(b.description());
    CHECK(mentions(report, "F"));
    CHECK_FALSE(mentions(report, "E"));
  }
  SUBCASE("distributor weights must cover outgoing edges") {
    auto desc = triangle().description();
    desc.nodes[1].distributorWeights = {{"ab", 1.0}, {"bc", 2.0}};
    const auto report = validateNetwork(desc);
    CHECK(mentions(report, "A"));
  }
}

TEST_CASE("validation is idempotent and does not mutate input") {
  auto b = triangle();
  b.walk("ghost", "A", "nowhere", 1, 1, 0.1).node("X", NodeKind::Junction);
  const auto before = b.description();
  const auto first = validateNetwork(before);
  const auto second = validateNetwork(before);
  CHECK(first == second);
  CHECK(before == b.description());
}

TEST_CASE("cell grid layout") {
  const auto g = buildCellGrid(1.0, 0.01);
  CHECK(g.cells == 102);
  CHECK(g.start == 1);
  CHECK(g.end == 100);
  CHECK(g.upstreamGhost == 0);
  CHECK(g.downstreamGhost == 101);

  const auto minimal = buildCellGrid(1.0, 0.5);
  CHECK(minimal.cells == 4);
  CHECK(minimal.start == 1);
  CHECK(minimal.end == 2);

  CHECK_THROWS_AS(buildCellGrid(1.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(buildCellGrid(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("interior cells cover the length within one dx") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> len(0.5, 200.0);
  std::uniform_real_distribution<double> frac(0.001, 0.4);
  for (int i = 0; i < 2000; ++i) {
    const double l = len(rng);
    const double dx = l * frac(rng);
    const auto g = buildCellGrid(l, dx);
    CHECK(std::abs(static_cast<double>(g.cells - 2) * dx - l) <= dx);
  }
}

TEST_CASE("network is indexed in ascending id order") {
  const auto net = triangle().build();
  for (std::size_t i = 1; i < net->nodes().size(); ++i) {
    CHECK(net->node(i - 1).id < net->node(i).id);
  }
  for (std::size_t i = 1; i < net->edges().size(); ++i) {
    CHECK(net->edge(i - 1).id < net->edge(i).id);
  }
  const auto a = *net->nodeIndex("A");
  const auto ab = *net->edgeIndex("ab");
  CHECK(net->edge(ab).tail == a);
  CHECK(net->node(a).outgoing.size() == 1);
  CHECK(net->node(a).incoming.size() == 2);
  CHECK_FALSE(net->nodeIndex("missing").has_value());
  CHECK_THROWS_AS(Network::build(NetBuilder().node("X", NodeKind::Exit).description()),
                  NetworkError);
}

TEST_CASE("kind and mode names round trip") {
  for (auto k : {NodeKind::Entry, NodeKind::Exit, NodeKind::Parking, NodeKind::Junction}) {
    CHECK((parseNodeKind(toString(k)) == k));
  }
  for (auto m : {EdgeMode::Walkway, EdgeMode::Street}) CHECK((parseEdgeMode(toString(m)) == m));
  CHECK_FALSE(parseNodeKind("roundabout").has_value());
}
