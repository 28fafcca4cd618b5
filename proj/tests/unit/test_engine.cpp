#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hybridflow/engine.hpp"
#include "hybridflow/errors.hpp"
#include "test_support.hpp"

using namespace hybridflow;
using testsupport::NetBuilder;

namespace {

const TrafficModel kModel = TrafficModel::fromParams({});
const OccupancyDistribution kSurvey = OccupancyDistribution::survey();

SimulationConfig quickConfig(std::int64_t steps, double dt = 0.01) {
  SimulationConfig c;
  c.dt = dt;
  c.maxSteps = steps;
  c.seed = 3;
  c.recordEvery = 1;
  return c;
}

// E -street-> P -walk-> J -walk-> X, plus a second walking entry F -> J.
std::shared_ptr<const Network> mixedNetwork(double streetLength, double walkWidth,
                                            double narrowWidth) {
  return NetBuilder()
      .node("E", NodeKind::Entry)
      .node("F", NodeKind::Entry)
      .node("P", NodeKind::Parking)
      .node("J", NodeKind::Junction)
      .node("X", NodeKind::Exit)
      .street("drive", "E", "P", streetLength, 1.0, 1.0)
      .walk("leave", "P", "J", 2.0, walkWidth, 0.1)
      .walk("side", "F", "J", 1.5, 2.0, 0.1)
      .walk("out", "J", "X", 2.0, narrowWidth, 0.1)
      .build();
}

bool sameState(const SimulationState& a, const SimulationState& b) {
  if (a.step != b.step || a.rng != b.rng || a.injected != b.injected || a.exited != b.exited) {
    return false;
  }
  for (std::size_t e = 0; e < a.edges.size(); ++e) {
    if (a.edges[e].density != b.edges[e].density) return false;
    if (a.edges[e].passengers != b.edges[e].passengers) return false;
    if (a.edges[e].fullCells != b.edges[e].fullCells) return false;
  }
  for (std::size_t n = 0; n < a.nodes.size(); ++n) {
    const auto& x = a.nodes[n].buffer;
    const auto& y = b.nodes[n].buffer;
    if (x.pedestrians.persons != y.pedestrians.persons || x.cars.cars != y.cars.cars ||
        x.cars.persons != y.cars.persons || x.waitingRiders != y.waitingRiders) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("audit person counts") {
  SUBCASE("walkway") {
    const auto net = NetBuilder()
                         .node("E", NodeKind::Entry)
                         .node("X", NodeKind::Exit)
                         .walk("w", "E", "X", 1.0, 2.0, 0.1)
                         .build();
    auto s = EdgeState::make(net->edge(0).grid, 16, 0.1, 1.0, false);
    REQUIRE(s.grid.end - s.grid.start + 1 == 10);
    s.fillInterior(partitionClasses(0.5, kModel.walkway.classes));
    std::vector<EdgeState> edges{s};
    std::vector<NodeState> nodes(2);
    CHECK(std::abs(auditPeople(*net, edges, nodes).totalPersons - 1.0) <= 1e-12);
  }
  SUBCASE("street with uniform occupancy") {
    const auto net = NetBuilder()
                         .node("E", NodeKind::Entry)
                         .node("X", NodeKind::Exit)
                         .street("s", "E", "X", 10.0, 1.0, 1.0)
                         .build();
    auto s = EdgeState::make(net->edge(0).grid, 1, 1.0, 1.0, true);
    const double rho[] = {0.1};
    const double riders[] = {0.1 * 2.21};
    s.fillInterior(rho, riders);
    std::vector<EdgeState> edges{s};
    std::vector<NodeState> nodes(2);
    CHECK(std::abs(auditPeople(*net, edges, nodes).totalPersons - 2.21) <= 1e-12);
  }
  SUBCASE("empty network") {
    const auto net = NetBuilder()
                         .node("E", NodeKind::Entry)
                         .node("X", NodeKind::Exit)
                         .walk("w", "E", "X", 1.0, 2.0, 0.1)
                         .build();
    std::vector<EdgeState> edges{EdgeState::make(net->edge(0).grid, 16, 0.1, 1.0, false)};
    std::vector<NodeState> nodes(2);
    CHECK(auditPeople(*net, edges, nodes).totalPersons == 0.0);
  }
}

TEST_CASE("demand injection") {
  Rng rng(5);
  SUBCASE("rate of cars per second times dt") {
    auto node = NodeState{NodeBuffer::make(16, 1)};
    DemandCursor cursor;
    const DemandEntry e{"E", SubjectKind::Car, false, 0.5, 0.0, 100.0};
    const double persons = injectDemand(node, e, cursor, kModel, kSurvey, rng, 0.0, 2.0);
    CHECK(node.buffer.cars.totalCars() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(persons == node.buffer.cars.totalPersons());
    CHECK(persons == std::round(persons));
    CHECK(persons >= 1);
    CHECK(persons <= 6);
  }
  SUBCASE("zero rate and closed windows are no-ops") {
    auto node = NodeState{NodeBuffer::make(16, 1)};
    DemandCursor cursor;
    const DemandEntry zero{"E", SubjectKind::Pedestrian, false, 0.0, 0.0, 10.0};
    const DemandEntry later{"E", SubjectKind::Pedestrian, false, 3.0, 5.0, 10.0};
    CHECK(injectDemand(node, zero, cursor, kModel, kSurvey, rng, 1.0, 0.5) == 0.0);
    CHECK(injectDemand(node, later, cursor, kModel, kSurvey, rng, 1.0, 0.5) == 0.0);
    CHECK(injectDemand(node, later, cursor, kModel, kSurvey, rng, 10.0, 0.5) == 0.0);
    CHECK(node.buffer.persons() == 0.0);
  }
  SUBCASE("one-shot pedestrians fire once with the default class mix") {
    auto node = NodeState{NodeBuffer::make(16, 1)};
    DemandCursor cursor;
    const DemandEntry e{"E", SubjectKind::Pedestrian, true, 100.0, 0.0};
    CHECK(injectDemand(node, e, cursor, kModel, kSurvey, rng, 0.0, 0.002) == 100.0);
    CHECK(injectDemand(node, e, cursor, kModel, kSurvey, rng, 0.002, 0.002) == 0.0);
    const auto expected = partitionClasses(100.0, kModel.walkway.classes);
    for (std::size_t k = 0; k < expected.size(); ++k) {
      CHECK(std::abs(node.buffer.pedestrians.persons[k] - expected[k]) <= 1e-12);
    }
  }
}

TEST_CASE("zero demand terminates before the first step") {
  const auto net = NetBuilder()
                       .node("E", NodeKind::Entry)
                       .node("X", NodeKind::Exit)
                       .walk("w", "E", "X", 1.0, 1.0, 0.1)
                       .build();
  const auto a = runSimulation(net, kModel, kSurvey, quickConfig(100), {});
  CHECK((a.termination == TerminationReason::Empty));
  CHECK(a.stepsRun == 0);
  CHECK(a.audits.empty());
  CHECK(a.snapshots.empty());
  CHECK(a.exitedPersons == 0.0);
}

TEST_CASE("single pedestrian pulse crosses at free-flow speed with a flat audit") {
  const double length = 20.0;
  const auto net = NetBuilder()
                       .node("E", NodeKind::Entry)
                       .node("X", NodeKind::Exit)
                       .walk("w", "E", "X", length, 10.0, 0.1)
                       .build();
  const DemandSchedule demand{{"E", SubjectKind::Pedestrian, true, 0.05, 0.0}};
  const auto a = runSimulation(net, kModel, kSurvey, quickConfig(20000), demand);
  REQUIRE((a.termination == TerminationReason::Empty));
  const double transit = (a.exitTimeSum - a.entryTimeSum) / a.exitedPersons;
  // At this density every class runs at its free-flow speed, so each class
  // takes length / v_k and the mean is weighted by the class mix.
  const auto& classes = kModel.walkway.classes;
  double expected = 0.0;
  for (std::size_t k = 0; k < classes.classCount(); ++k) {
    expected += classes.weights()[k] * length / classes.representatives()[k];
  }
  CHECK(expected > length / 1.34);
  CHECK(std::abs(transit - expected) <= 0.01 * expected);
  for (const auto& r : a.audits) {
    CHECK(std::abs(r.totalPersons + r.exitedToDate - 0.05) <= 1e-9 * 0.05);
  }
}

TEST_CASE("global conservation on random mixed scenarios") {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto net = mixedNetwork(5.0 + 20.0 * u(gen), 0.5 + 3.0 * u(gen), 0.3 + u(gen));
    DemandSchedule demand{
        {"E", SubjectKind::Car, false, 2.0 * u(gen), 0.0, 1.0 + 2.0 * u(gen)},
        {"F", SubjectKind::Pedestrian, true, 20.0 * u(gen), u(gen)},
        {"F", SubjectKind::Pedestrian, false, 5.0 * u(gen), 0.0, 2.0},
    };
    auto config = quickConfig(400);
    config.seed = gen();
    config.finiteNodes = u(gen) < 0.5;
    config.distributor = u(gen) < 0.5 ? DistributorKind::Fixed : DistributorKind::Dijkstra;
    config.alpha = u(gen);
    const std::map<std::string, double> initial{{"leave", 3.0 * u(gen)},
                                                {"drive", 0.1 * u(gen)}};
    const auto a = runSimulation(net, kModel, kSurvey, config, demand, initial);
    CHECK_MESSAGE(!a.aborted(), a.message);
    double lastExited = 0.0;
    for (const auto& r : a.audits) {
      CHECK(r.drift <= 1e-9);
      CHECK(r.exitedToDate >= lastExited);
      lastExited = r.exitedToDate;
      for (double p : r.edgePersons) CHECK(p >= 0.0);
      for (double p : r.nodePersons) CHECK(p >= 0.0);
    }
  }
}

TEST_CASE("runs are deterministic and restorable") {
  const auto net = mixedNetwork(12.0, 1.0, 0.5);
  const DemandSchedule demand{{"E", SubjectKind::Car, false, 1.5, 0.0, 2.0},
                              {"F", SubjectKind::Pedestrian, true, 8.0, 0.0}};
  auto config = quickConfig(300);
  config.distributor = DistributorKind::Dijkstra;

  Simulation one(net, kModel, kSurvey, config, demand);
  Simulation two(net, kModel, kSurvey, config, demand);
  for (int k = 0; k < 150; ++k) {
    one.step();
    two.step();
  }
  CHECK(sameState(one.state(), two.state()));

  const auto saved = one.state();
  one.step();
  const auto next = one.state();
  for (int k = 0; k < 20; ++k) one.step();
  one.restore(saved);
  one.step();
  CHECK(sameState(one.state(), next));
  CHECK(one.state().routes.cost(0, EdgeMode::Street) == next.routes.cost(0, EdgeMode::Street));
}

TEST_CASE("cyclic mixed network without exits keeps everyone") {
  const auto net = NetBuilder()
                       .node("P1", NodeKind::Parking)
                       .node("J1", NodeKind::Junction)
                       .node("P2", NodeKind::Parking)
                       .node("J2", NodeKind::Junction)
                       .street("s1", "P1", "J1", 10.0, 1.0, 0.5)
                       .street("s2", "J1", "P2", 10.0, 1.0, 0.5)
                       .walk("w1", "P2", "J2", 1.0, 1.0, 0.01)
                       .walk("w2", "J2", "P1", 1.0, 1.0, 0.01)
                       .build();
  auto config = quickConfig(1000, 0.002);
  config.recordEvery = 100;
  const std::map<std::string, double> initial{{"s1", 0.05}, {"s2", 0.02}, {"w1", 1.0},
                                              {"w2", 2.5}};
  const auto a = runSimulation(net, kModel, kSurvey, config, {}, initial);
  CHECK_MESSAGE(!a.aborted(), a.message);
  CHECK(a.stepsRun == 1000);
  CHECK(a.exitedPersons == 0.0);
  for (const auto& r : a.audits) CHECK(r.drift <= 1e-9);
  CHECK(std::abs(a.remainingPersons - a.initialPersons) <= 1e-9 * a.initialPersons);
}

TEST_CASE("configuration errors surface before stepping") {
  const auto net = NetBuilder()
                       .node("E", NodeKind::Entry)
                       .node("X", NodeKind::Exit)
                       .walk("w", "E", "X", 1.0, 1.0, 0.01)
                       .build();
  CHECK_THROWS_AS(Simulation(net, kModel, kSurvey, quickConfig(10, 0.01), {}), StabilityError);
  CHECK_NOTHROW(Simulation(net, kModel, kSurvey, quickConfig(10, 0.002), {}));
  const DemandSchedule onExit{{"X", SubjectKind::Pedestrian, true, 1.0, 0.0}};
  CHECK_THROWS(Simulation(net, kModel, kSurvey, quickConfig(10, 0.002), onExit));
  const DemandSchedule carsOnFoot{{"E", SubjectKind::Car, true, 1.0, 0.0}};
  CHECK_THROWS(Simulation(net, kModel, kSurvey, quickConfig(10, 0.002), carsOnFoot));
  const DemandSchedule negative{{"E", SubjectKind::Pedestrian, true, -1.0, 0.0}};
  CHECK_THROWS(Simulation(net, kModel, kSurvey, quickConfig(10, 0.002), negative));
  const DemandSchedule backwards{{"E", SubjectKind::Pedestrian, false, 1.0, 5.0, 1.0}};
  CHECK_THROWS(Simulation(net, kModel, kSurvey, quickConfig(10, 0.002), backwards));
}

TEST_CASE("record cadence") {
  SimulationConfig c;
  c.maxSteps = 500;
  CHECK(c.effectiveRecordEvery() == 1);
  c.maxSteps = 5000;
  CHECK(c.effectiveRecordEvery() == 5);
  c.recordEvery = 7;
  CHECK(c.effectiveRecordEvery() == 7);
}
