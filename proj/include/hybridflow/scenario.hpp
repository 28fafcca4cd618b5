#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridflow/engine.hpp"
#include "hybridflow/network.hpp"
#include "hybridflow/occupancy.hpp"
#include "hybridflow/traffic_model.hpp"

namespace hybridflow {

inline constexpr const char* kScenarioSchema = "hybridflow-scenario/1";

/// Everything a scenario file describes, before validation.
struct Scenario {
  NetworkDescription network;
  ModelParams params;
  std::vector<double> occupancyCounts = OccupancyDistribution::surveyCounts();
  SimulationConfig config;
  DemandSchedule demand;
  /// Uniform starting total density per edge id.
  std::map<std::string, double> initialDensity;

  bool operator==(const Scenario&) const = default;
};

/// Command-line values that win over the scenario file.
struct ConfigOverrides {
  std::optional<std::int64_t> steps;
  std::optional<double> dt;
  std::optional<double> alpha;
  std::optional<DistributorKind> distributor;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> recordEvery;
  std::optional<double> auditTolerance;
  std::optional<bool> finiteNodes;

  void applyTo(SimulationConfig& config) const;
};

enum class ScenarioErrorKind { Io, Syntax, Schema, Network, Stability };
std::string_view toString(ScenarioErrorKind kind);

class ScenarioError : public std::runtime_error {
 public:
  /// `location` is a JSON pointer for schema errors, "line:col" for syntax
  /// errors and a path for I/O errors.
  ScenarioError(ScenarioErrorKind kind, std::string location, const std::string& message);

  ScenarioErrorKind kind() const { return kind_; }
  const std::string& location() const { return location_; }

 private:
  ScenarioErrorKind kind_;
  std::string location_;
};

/// Parses and schema-checks a scenario document; no network validation.
Scenario parseScenario(const nlohmann::json& doc);
Scenario parseScenarioText(const std::string& text);
nlohmann::json scenarioToJson(const Scenario& scenario);

/// A scenario turned into validated runtime objects.
struct PreparedScenario {
  Scenario scenario;
  std::shared_ptr<const Network> network;
  TrafficModel model;
  OccupancyDistribution occupancy;

  Simulation makeSimulation() const;
};

/// Applies overrides, builds the network, and checks the timestep. Throws
/// ScenarioError of kind Schema, Network or Stability.
PreparedScenario prepareScenario(Scenario scenario, const ConfigOverrides& overrides = {});

/// Reads, parses and prepares a scenario file.
PreparedScenario loadScenario(const std::filesystem::path& path,
                              const ConfigOverrides& overrides = {});

void saveScenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace hybridflow
