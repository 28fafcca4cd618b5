#include "hybridflow/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "hybridflow/edge_solver.hpp"

namespace hybridflow {

using nlohmann::json;

std::string_view toString(ScenarioErrorKind kind) {
  switch (kind) {
    case ScenarioErrorKind::Io: return "io";
    case ScenarioErrorKind::Syntax: return "syntax";
    case ScenarioErrorKind::Schema: return "schema";
    case ScenarioErrorKind::Network: return "network";
    case ScenarioErrorKind::Stability: return "stability";
  }
  return "schema";
}

ScenarioError::ScenarioError(ScenarioErrorKind kind, std::string location,
                             const std::string& message)
    : std::runtime_error(std::string(toString(kind)) + " error at " +
                         (location.empty() ? std::string("/") : location) + ": " + message),
      kind_(kind),
      location_(std::move(location)) {}

void ConfigOverrides::applyTo(SimulationConfig& config) const {
  if (steps) config.maxSteps = *steps;
  if (dt) config.dt = *dt;
  if (alpha) config.alpha = *alpha;
  if (distributor) config.distributor = *distributor;
  if (seed) config.seed = *seed;
  if (recordEvery) config.recordEvery = *recordEvery;
  if (auditTolerance) config.auditTolerance = *auditTolerance;
  if (finiteNodes) config.finiteNodes = *finiteNodes;
}

namespace {

[[noreturn]] void schemaError(const std::string& where, const std::string& message) {
  throw ScenarioError(ScenarioErrorKind::Schema, where, message);
}

std::string escapeToken(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string child(const std::string& where, const std::string& key) {
  return where + "/" + escapeToken(key);
}

std::string child(const std::string& where, std::size_t index) {
  return where + "/" + std::to_string(index);
}

void expectObject(const json& value, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!value.is_object()) schemaError(where, "expected an object");
  for (const auto& item : value.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) schemaError(child(where, item.key()), "unknown key '" + item.key() + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto found = obj.find(key);
  if (found == obj.end()) schemaError(where, std::string("missing required key '") + key + "'");
  return *found;
}

double asNumber(const json& value, const std::string& where) {
  if (!value.is_number()) schemaError(where, "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) schemaError(where, "expected a finite number");
  return x;
}

std::int64_t asInteger(const json& value, const std::string& where) {
  if (!value.is_number_integer()) schemaError(where, "expected an integer");
  if (value.is_number_unsigned() &&
      value.get<std::uint64_t>() >
          static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    schemaError(where, "integer out of range");
  }
  return value.get<std::int64_t>();
}

std::uint64_t asUnsigned(const json& value, const std::string& where) {
  if (!value.is_number_integer()) schemaError(where, "expected an integer");
  if (!value.is_number_unsigned() && value.get<std::int64_t>() < 0) {
    schemaError(where, "expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

const std::string& asString(const json& value, const std::string& where) {
  if (!value.is_string()) schemaError(where, "expected a string");
  return value.get_ref<const std::string&>();
}

void readNumber(const json& obj, const char* key, const std::string& where, double& out) {
  if (const auto found = obj.find(key); found != obj.end()) out = asNumber(*found, child(where, key));
}

void readInteger(const json& obj, const char* key, const std::string& where, std::int64_t& out) {
  if (const auto found = obj.find(key); found != obj.end()) {
    out = asInteger(*found, child(where, key));
  }
}

void readCount(const json& obj, const char* key, const std::string& where, std::size_t& out) {
  if (const auto found = obj.find(key); found != obj.end()) {
    out = static_cast<std::size_t>(asUnsigned(*found, child(where, key)));
  }
}

NodeDef parseNode(const json& value, const std::string& where) {
  expectObject(value, where, {"id", "kind", "weights"});
  NodeDef node;
  node.id = asString(require(value, "id", where), child(where, "id"));
  const auto& kindText = asString(require(value, "kind", where), child(where, "kind"));
  const auto kind = parseNodeKind(kindText);
  if (!kind) schemaError(child(where, "kind"), "unknown node kind '" + kindText + "'");
  node.kind = *kind;
  if (const auto found = value.find("weights"); found != value.end()) {
    const auto at = child(where, "weights");
    if (!found->is_object()) schemaError(at, "expected an object of edge id -> share");
    for (const auto& item : found->items()) {
      node.distributorWeights[item.key()] = asNumber(item.value(), child(at, item.key()));
    }
  }
  return node;
}

EdgeDef parseEdge(const json& value, const std::string& where, std::optional<double>& initial) {
  expectObject(value, where,
               {"id", "mode", "from", "to", "length_m", "width", "dx_m", "initial_density"});
  EdgeDef edge;
  edge.id = asString(require(value, "id", where), child(where, "id"));
  const auto& modeText = asString(require(value, "mode", where), child(where, "mode"));
  const auto mode = parseEdgeMode(modeText);
  if (!mode) schemaError(child(where, "mode"), "unknown edge mode '" + modeText + "'");
  edge.mode = *mode;
  edge.from = asString(require(value, "from", where), child(where, "from"));
  edge.to = asString(require(value, "to", where), child(where, "to"));
  edge.length = asNumber(require(value, "length_m", where), child(where, "length_m"));
  edge.dx = asNumber(require(value, "dx_m", where), child(where, "dx_m"));
  readNumber(value, "width", where, edge.width);
  initial.reset();
  if (const auto found = value.find("initial_density"); found != value.end()) {
    initial = asNumber(*found, child(where, "initial_density"));
    if (*initial < 0.0) schemaError(child(where, "initial_density"), "density must be >= 0");
  }
  return edge;
}

DemandEntry parseDemand(const json& value, const std::string& where) {
  expectObject(value, where, {"node", "subject", "type", "amount", "start_s", "end_s"});
  DemandEntry entry;
  entry.node = asString(require(value, "node", where), child(where, "node"));
  const auto& subject = asString(require(value, "subject", where), child(where, "subject"));
  if (subject == "pedestrian") {
    entry.kind = SubjectKind::Pedestrian;
  } else if (subject == "car") {
    entry.kind = SubjectKind::Car;
  } else {
    schemaError(child(where, "subject"), "expected 'pedestrian' or 'car'");
  }
  const auto& type = asString(require(value, "type", where), child(where, "type"));
  if (type == "once") {
    entry.oneShot = true;
  } else if (type == "rate") {
    entry.oneShot = false;
  } else {
    schemaError(child(where, "type"), "expected 'once' or 'rate'");
  }
  entry.amount = asNumber(require(value, "amount", where), child(where, "amount"));
  if (entry.amount < 0.0) schemaError(child(where, "amount"), "amount must be >= 0");
  readNumber(value, "start_s", where, entry.start);
  readNumber(value, "end_s", where, entry.end);
  if (entry.start > entry.end) schemaError(child(where, "end_s"), "window end precedes its start");
  return entry;
}

void parseParams(const json& value, const std::string& where, Scenario& scenario) {
  expectObject(value, where,
               {"pedestrian", "car", "occupancy_counts", "pedestrian_classes", "car_classes",
                "truncation"});
  auto& params = scenario.params;
  if (const auto found = value.find("pedestrian"); found != value.end()) {
    const auto at = child(where, "pedestrian");
    expectObject(*found, at, {"vff_mean", "vff_stddev", "gamma", "rho_max"});
    readNumber(*found, "vff_mean", at, params.pedestrian.vffMean);
    readNumber(*found, "vff_stddev", at, params.pedestrian.vffStdDev);
    readNumber(*found, "gamma", at, params.pedestrian.gamma);
    readNumber(*found, "rho_max", at, params.pedestrian.rhoMax);
  }
  if (const auto found = value.find("car"); found != value.end()) {
    const auto at = child(where, "car");
    expectObject(*found, at, {"vff", "vff_stddev", "k", "n", "rho_max"});
    readNumber(*found, "vff", at, params.car.vff);
    readNumber(*found, "vff_stddev", at, params.car.vffStdDev);
    readNumber(*found, "k", at, params.car.bigK);
    readNumber(*found, "n", at, params.car.n);
    readNumber(*found, "rho_max", at, params.car.rhoMax);
  }
  if (const auto found = value.find("occupancy_counts"); found != value.end()) {
    const auto at = child(where, "occupancy_counts");
    if (!found->is_array() || found->empty()) schemaError(at, "expected a non-empty array");
    scenario.occupancyCounts.clear();
    for (std::size_t i = 0; i < found->size(); ++i) {
      const double c = asNumber((*found)[i], child(at, i));
      if (c < 0.0) schemaError(child(at, i), "counts must be >= 0");
      scenario.occupancyCounts.push_back(c);
    }
  }
  readCount(value, "pedestrian_classes", where, params.pedestrianClasses);
  readCount(value, "car_classes", where, params.carClasses);
  readNumber(value, "truncation", where, params.truncation);
}

void parseSim(const json& value, const std::string& where, SimulationConfig& config) {
  expectObject(value, where,
               {"dt", "max_steps", "alpha", "distributor", "seed", "routing_cadence",
                "audit_tolerance", "nodes", "record_every", "routing_density",
                "empty_threshold"});
  readNumber(value, "dt", where, config.dt);
  readInteger(value, "max_steps", where, config.maxSteps);
  readNumber(value, "alpha", where, config.alpha);
  if (const auto found = value.find("distributor"); found != value.end()) {
    const auto& text = asString(*found, child(where, "distributor"));
    if (text == "fixed") {
      config.distributor = DistributorKind::Fixed;
    } else if (text == "dijkstra") {
      config.distributor = DistributorKind::Dijkstra;
    } else {
      schemaError(child(where, "distributor"), "expected 'fixed' or 'dijkstra'");
    }
  }
  if (const auto found = value.find("seed"); found != value.end()) {
    config.seed = asUnsigned(*found, child(where, "seed"));
  }
  readInteger(value, "routing_cadence", where, config.routingCadence);
  readNumber(value, "audit_tolerance", where, config.auditTolerance);
  if (const auto found = value.find("nodes"); found != value.end()) {
    const auto& text = asString(*found, child(where, "nodes"));
    if (text == "finite") {
      config.finiteNodes = true;
    } else if (text == "infinite") {
      config.finiteNodes = false;
    } else {
      schemaError(child(where, "nodes"), "expected 'finite' or 'infinite'");
    }
  }
  readInteger(value, "record_every", where, config.recordEvery);
  if (const auto found = value.find("routing_density"); found != value.end()) {
    const auto& text = asString(*found, child(where, "routing_density"));
    if (text == "mean") {
      config.routingDensity = DensityStatistic::Mean;
    } else if (text == "max") {
      config.routingDensity = DensityStatistic::Max;
    } else {
      schemaError(child(where, "routing_density"), "expected 'mean' or 'max'");
    }
  }
  readNumber(value, "empty_threshold", where, config.emptyThreshold);
}

std::string lineColumn(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

Scenario parseScenario(const json& doc) {
  expectObject(doc, "", {"schema", "nodes", "edges", "demand", "params", "sim"});
  const auto& schema = asString(require(doc, "schema", ""), "/schema");
  if (schema != kScenarioSchema) {
    schemaError("/schema", "unsupported schema '" + schema + "', expected '" + kScenarioSchema + "'");
  }
  Scenario scenario;

  const auto& nodes = require(doc, "nodes", "");
  if (!nodes.is_array()) schemaError("/nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    scenario.network.nodes.push_back(parseNode(nodes[i], child("/nodes", i)));
  }

  const auto& edges = require(doc, "edges", "");
  if (!edges.is_array()) schemaError("/edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    std::optional<double> initial;
    const auto where = child("/edges", i);
    scenario.network.edges.push_back(parseEdge(edges[i], where, initial));
    const auto& id = scenario.network.edges.back().id;
    for (std::size_t j = 0; j < i; ++j) {
      if (scenario.network.edges[j].id == id) {
        schemaError(child(where, "id"), "duplicate edge id '" + id + "'");
      }
    }
    if (initial) scenario.initialDensity[id] = *initial;
  }
  for (std::size_t i = 0; i < scenario.network.nodes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (scenario.network.nodes[j].id == scenario.network.nodes[i].id) {
        schemaError(child(child("/nodes", i), "id"),
                    "duplicate node id '" + scenario.network.nodes[i].id + "'");
      }
    }
  }

  if (const auto found = doc.find("demand"); found != doc.end()) {
    if (!found->is_array()) schemaError("/demand", "expected an array");
    for (std::size_t i = 0; i < found->size(); ++i) {
      scenario.demand.push_back(parseDemand((*found)[i], child("/demand", i)));
    }
  }
  if (const auto found = doc.find("params"); found != doc.end()) {
    parseParams(*found, "/params", scenario);
  }
  if (const auto found = doc.find("sim"); found != doc.end()) {
    parseSim(*found, "/sim", scenario.config);
  }
  return scenario;
}

Scenario parseScenarioText(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ScenarioError(ScenarioErrorKind::Syntax, lineColumn(text, err.byte), err.what());
  }
  return parseScenario(doc);
}

json scenarioToJson(const Scenario& scenario) {
  json doc;
  doc["schema"] = kScenarioSchema;
  doc["nodes"] = json::array();
  for (const auto& node : scenario.network.nodes) {
    json n{{"id", node.id}, {"kind", std::string(toString(node.kind))}};
    if (!node.distributorWeights.empty()) {
      json w = json::object();
      for (const auto& [edge, share] : node.distributorWeights) w[edge] = share;
      n["weights"] = w;
    }
    doc["nodes"].push_back(n);
  }
  doc["edges"] = json::array();
  for (const auto& edge : scenario.network.edges) {
    json e{{"id", edge.id},          {"mode", std::string(toString(edge.mode))},
           {"from", edge.from},      {"to", edge.to},
           {"length_m", edge.length}, {"width", edge.width},
           {"dx_m", edge.dx}};
    if (const auto found = scenario.initialDensity.find(edge.id);
        found != scenario.initialDensity.end()) {
      e["initial_density"] = found->second;
    }
    doc["edges"].push_back(e);
  }
  doc["demand"] = json::array();
  for (const auto& entry : scenario.demand) {
    json d{{"node", entry.node},
           {"subject", entry.kind == SubjectKind::Car ? "car" : "pedestrian"},
           {"type", entry.oneShot ? "once" : "rate"},
           {"amount", entry.amount},
           {"start_s", entry.start}};
    if (std::isfinite(entry.end)) d["end_s"] = entry.end;
    doc["demand"].push_back(d);
  }
  const auto& p = scenario.params;
  doc["params"] = {
      {"pedestrian",
       {{"vff_mean", p.pedestrian.vffMean},
        {"vff_stddev", p.pedestrian.vffStdDev},
        {"gamma", p.pedestrian.gamma},
        {"rho_max", p.pedestrian.rhoMax}}},
      {"car",
       {{"vff", p.car.vff},
        {"vff_stddev", p.car.vffStdDev},
        {"k", p.car.bigK},
        {"n", p.car.n},
        {"rho_max", p.car.rhoMax}}},
      {"occupancy_counts", scenario.occupancyCounts},
      {"pedestrian_classes", p.pedestrianClasses},
      {"car_classes", p.carClasses},
      {"truncation", p.truncation}};
  const auto& c = scenario.config;
  doc["sim"] = {{"dt", c.dt},
                {"max_steps", c.maxSteps},
                {"alpha", c.alpha},
                {"distributor", c.distributor == DistributorKind::Fixed ? "fixed" : "dijkstra"},
                {"seed", c.seed},
                {"routing_cadence", c.routingCadence},
                {"audit_tolerance", c.auditTolerance},
                {"nodes", c.finiteNodes ? "finite" : "infinite"},
                {"record_every", c.recordEvery},
                {"routing_density", c.routingDensity == DensityStatistic::Mean ? "mean" : "max"},
                {"empty_threshold", c.emptyThreshold}};
  return doc;
}

Simulation PreparedScenario::makeSimulation() const {
  return Simulation(network, model, occupancy, scenario.config, scenario.demand,
                    scenario.initialDensity);
}

PreparedScenario prepareScenario(Scenario scenario, const ConfigOverrides& overrides) {
  overrides.applyTo(scenario.config);
  const auto& config = scenario.config;
  if (!(config.dt > 0.0)) schemaError("/sim/dt", "dt must be positive");
  if (config.maxSteps < 1) schemaError("/sim/max_steps", "max_steps must be at least 1");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) schemaError("/sim/alpha", "alpha must lie in [0, 1]");
  if (config.routingCadence < 1) schemaError("/sim/routing_cadence", "must be at least 1");
  if (!(config.auditTolerance > 0.0)) schemaError("/sim/audit_tolerance", "must be positive");
  if (config.recordEvery < 0) schemaError("/sim/record_every", "must be >= 0");
  if (!(config.emptyThreshold >= 0.0)) schemaError("/sim/empty_threshold", "must be >= 0");

  const auto model = [&] {
    try {
      return TrafficModel::fromParams(scenario.params);
    } catch (const std::invalid_argument& err) {
      schemaError("/params", err.what());
    }
  }();
  const auto occupancy = [&] {
    try {
      return OccupancyDistribution::fromCounts(scenario.occupancyCounts);
    } catch (const std::invalid_argument& err) {
      schemaError("/params/occupancy_counts", err.what());
    }
  }();

  const auto violations = validateNetwork(scenario.network);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << violations.size() << " network violation(s)";
    for (const auto& v : violations) msg << "\n  " << v.subject << ": " << v.message;
    throw ScenarioError(ScenarioErrorKind::Network, violations.front().subject, msg.str());
  }
  auto network = std::make_shared<const Network>(Network::build(scenario.network));
  const auto& net = *network;

  for (std::size_t i = 0; i < scenario.demand.size(); ++i) {
    const auto& entry = scenario.demand[i];
    const auto where = child("/demand", i);
    const auto node = net.nodeIndex(entry.node);
    if (!node) schemaError(child(where, "node"), "unknown node '" + entry.node + "'");
    if (net.node(*node).kind != NodeKind::Entry) {
      schemaError(child(where, "node"), "demand node '" + entry.node + "' is not an entry node");
    }
  }
  for (const auto& [id, rho] : scenario.initialDensity) {
    const auto e = net.edgeIndex(id);
    if (!e) schemaError("/edges", "initial density for unknown edge '" + id + "'");
    if (rho > model.forMode(net.edge(*e).mode).rhoMax()) {
      schemaError("/edges", "initial density of '" + id + "' exceeds rho_max");
    }
  }

  const auto unstable = stabilityCheck(net, model.walkway, model.street, config.dt);
  if (!unstable.empty()) {
    std::ostringstream msg;
    msg << "dt=" << config.dt << " exceeds dx / max speed on " << unstable.size() << " edge(s)";
    for (const auto& v : unstable) msg << "\n  " << v.subject << ": " << v.message;
    throw ScenarioError(ScenarioErrorKind::Stability, "/sim/dt", msg.str());
  }
  return PreparedScenario{std::move(scenario), std::move(network), model, occupancy};
}

PreparedScenario loadScenario(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError(ScenarioErrorKind::Io, path.string(), "cannot open scenario file (not found or unreadable)");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return prepareScenario(parseScenarioText(buffer.str()), overrides);
}

void saveScenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError(ScenarioErrorKind::Io, path.string(), "cannot write scenario file");
  out << scenarioToJson(scenario).dump(2) << '\n';
  if (!out) throw ScenarioError(ScenarioErrorKind::Io, path.string(), "write failed");
}

}  // namespace hybridflow
