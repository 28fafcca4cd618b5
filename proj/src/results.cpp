#include "hybridflow/results.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hybridflow {

std::string formatNumber(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0 into 0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string densitiesCsv(const ResultArchive& archive) {
  std::string out = "step,time_s,edge_id,cell_index,total_density";
  for (std::size_t k = 0; k < archive.maxClasses; ++k) out += ",class_" + std::to_string(k);
  out += '\n';
  for (const auto& snap : archive.snapshots) {
    const std::string prefix = std::to_string(snap.step) + ',' + formatNumber(snap.time) + ',';
    for (std::size_t e = 0; e < snap.edges.size(); ++e) {
      const auto& grid = archive.grids[e];
      const auto classes = archive.edgeClasses[e];
      const auto& rho = snap.edges[e];
      for (std::size_t i = grid.start; i <= grid.end; ++i) {
        double total = 0.0;
        for (std::size_t k = 0; k < classes; ++k) total += rho[k * grid.cells + i];
        out += prefix;
        out += archive.edgeIds[e];
        out += ',' + std::to_string(i) + ',' + formatNumber(total);
        for (std::size_t k = 0; k < archive.maxClasses; ++k) {
          out += ',';
          if (k < classes) out += formatNumber(rho[k * grid.cells + i]);
        }
        out += '\n';
      }
    }
  }
  return out;
}

std::string auditCsv(const ResultArchive& archive) {
  std::string out = "step,time_s,total_persons,injected_to_date,exited_to_date,drift";
  for (const auto& id : archive.edgeIds) out += ",edge:" + id;
  for (const auto& id : archive.nodeIds) out += ",node:" + id;
  out += '\n';
  for (const auto& a : archive.audits) {
    out += std::to_string(a.step) + ',' + formatNumber(a.time) + ',' + formatNumber(a.totalPersons) +
           ',' + formatNumber(a.injectedToDate) + ',' + formatNumber(a.exitedToDate) + ',' +
           formatNumber(a.drift);
    for (double v : a.edgePersons) out += ',' + formatNumber(v);
    for (double v : a.nodePersons) out += ',' + formatNumber(v);
    out += '\n';
  }
  return out;
}

std::optional<double> meanTravelTime(const ResultArchive& archive, double tolerance) {
  const double entered = archive.initialPersons + archive.injectedPersons;
  if (!(archive.exitedPersons > 0.0)) return std::nullopt;
  if (archive.remainingPersons > tolerance * std::max(1.0, entered)) return std::nullopt;
  return (archive.exitTimeSum - archive.entryTimeSum) / archive.exitedPersons;
}

std::string summaryJson(const ResultArchive& archive) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["termination"] = std::string(toString(archive.termination));
  doc["message"] = archive.message;
  doc["steps"] = archive.stepsRun;
  doc["dt"] = archive.dt;
  doc["simulated_time_s"] = static_cast<double>(archive.stepsRun) * archive.dt;
  doc["totals"] = {{"initial_persons", archive.initialPersons},
                   {"injected_persons", archive.injectedPersons},
                   {"exited_persons", archive.exitedPersons},
                   {"remaining_persons", archive.remainingPersons}};
  double maxDrift = 0.0;
  for (const auto& a : archive.audits) maxDrift = std::max(maxDrift, a.drift);
  doc["max_audit_drift"] = maxDrift;
  const auto travel = meanTravelTime(archive);
  doc["mean_travel_time_s"] = travel ? ordered_json(*travel) : ordered_json(nullptr);
  doc["mean_exit_time_s"] = archive.exitedPersons > 0.0
                                ? ordered_json(archive.exitTimeSum / archive.exitedPersons)
                                : ordered_json(nullptr);
  doc["events"] = ordered_json::array();
  for (const auto& ev : archive.events) {
    doc["events"].push_back({{"kind", ev.kind},
                             {"subject", ev.subject},
                             {"first_step", ev.firstStep},
                             {"last_step", ev.lastStep},
                             {"count", ev.count}});
  }
  return doc.dump(2) + '\n';
}

namespace {

void writeFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResultsError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw ResultsError("write failed for " + path.string());
}

}  // namespace

void writeResults(const ResultArchive& archive, const std::filesystem::path& outDir) {
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec || !std::filesystem::is_directory(outDir)) {
    throw ResultsError("cannot create output directory " + outDir.string() +
                       (ec ? ": " + ec.message() : std::string()));
  }
  writeFile(outDir / "densities.csv", densitiesCsv(archive));
  writeFile(outDir / "audit.csv", auditCsv(archive));
  writeFile(outDir / "summary.json", summaryJson(archive));
}

}  // namespace hybridflow
