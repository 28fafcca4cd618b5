// Command-line runner: loads a scenario, runs it, writes the result tree.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "hybridflow/errors.hpp"
#include "hybridflow/results.hpp"
#include "hybridflow/scenario.hpp"

namespace {

// Exit statuses, one per error class.
enum Status : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kSyntax = 4,
  kSchema = 5,
  kNetwork = 6,
  kStability = 7,
  kRunAborted = 8,
  kOutput = 9,
};

int statusFor(hybridflow::ScenarioErrorKind kind) {
  using hybridflow::ScenarioErrorKind;
  switch (kind) {
    case ScenarioErrorKind::Io: return kIo;
    case ScenarioErrorKind::Syntax: return kSyntax;
    case ScenarioErrorKind::Schema: return kSchema;
    case ScenarioErrorKind::Network: return kNetwork;
    case ScenarioErrorKind::Stability: return kStability;
  }
  return kSchema;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run a hybrid pedestrian/car network scenario"};
  std::string scenarioPath;
  std::string outDir = "hybridflow_out";
  hybridflow::ConfigOverrides overrides;
  std::string distributor;
  std::string nodes;

  app.add_option("--scenario", scenarioPath, "Scenario JSON file")->required();
  app.add_option("--out", outDir, "Output directory")->capture_default_str();
  app.add_option("--steps", overrides.steps, "Maximum number of timesteps")
      ->check(CLI::PositiveNumber);
  app.add_option("--dt", overrides.dt, "Timestep in seconds")->check(CLI::PositiveNumber);
  app.add_option("--alpha", overrides.alpha, "Velocity look-ahead blend")->check(CLI::Range(0.0, 1.0));
  app.add_option("--distributor", distributor, "Node distributor")
      ->check(CLI::IsMember({"fixed", "dijkstra"}));
  app.add_option("--seed", overrides.seed, "Random seed");
  app.add_option("--record-every", overrides.recordEvery, "Density snapshot cadence in steps")
      ->check(CLI::PositiveNumber);
  app.add_option("--audit-tolerance", overrides.auditTolerance, "Relative mass audit tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--nodes", nodes, "Node capacity model")
      ->check(CLI::IsMember({"finite", "infinite"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }
  if (!distributor.empty()) {
    overrides.distributor = distributor == "fixed" ? hybridflow::DistributorKind::Fixed
                                                   : hybridflow::DistributorKind::Dijkstra;
  }
  if (!nodes.empty()) overrides.finiteNodes = nodes == "finite";

  try {
    const auto prepared = hybridflow::loadScenario(scenarioPath, overrides);
    auto sim = prepared.makeSimulation();
    const auto archive = sim.run();
    hybridflow::writeResults(archive, outDir);
    std::cout << "termination: " << hybridflow::toString(archive.termination) << "\n"
              << "steps: " << archive.stepsRun << "\n"
              << "exited persons: " << archive.exitedPersons << "\n"
              << "remaining persons: " << archive.remainingPersons << "\n";
    if (archive.aborted()) {
      std::cerr << "run aborted: " << archive.message << "\n";
      return kRunAborted;
    }
    return kOk;
  } catch (const hybridflow::ScenarioError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return statusFor(err.kind());
  } catch (const hybridflow::StabilityError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kStability;
  } catch (const hybridflow::SimulationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kRunAborted;
  } catch (const hybridflow::ResultsError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kOutput;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kSchema;
  }
}
