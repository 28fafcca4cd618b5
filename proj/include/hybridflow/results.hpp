#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "hybridflow/engine.hpp"

namespace hybridflow {

class ResultsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Round-trip exact decimal text ("%.17g"); non-finite values become "nan"/"inf".
std::string formatNumber(double value);

std::string densitiesCsv(const ResultArchive& archive);
std::string auditCsv(const ResultArchive& archive);
std::string summaryJson(const ResultArchive& archive);

/// Mean time between entering (t=0 for the initial population) and leaving
/// through an exit; empty while anyone remains in the network.
std::optional<double> meanTravelTime(const ResultArchive& archive, double tolerance = 1e-9);

/// Writes densities.csv, audit.csv and summary.json into `outDir`, creating
/// it if needed. Throws ResultsError when the directory cannot be written.
void writeResults(const ResultArchive& archive, const std::filesystem::path& outDir);

}  // namespace hybridflow
