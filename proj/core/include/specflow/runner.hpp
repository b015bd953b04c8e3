#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "specflow/scenario.hpp"

namespace specflow::cli {

/// One checked quantity. Integer identities use tolerance 0.
struct Record {
  std::string experiment;
  std::string name;
  std::vector<std::pair<std::string, double>> values;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string error;  // error code and message when a guard fired
};

struct RunReport {
  ScenarioConfig config;
  std::vector<Record> records;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> tables;  // CSV file name -> body
  std::map<std::string, double> wall_seconds;  // per experiment; kept out of report.json

  bool pass(bool strict = false) const;
};

struct RunOptions {
  int threads = 1;
};

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Deterministic JSON (no timings): config echo, records, warnings, verdict.
std::string report_json(const RunReport& report, bool strict = false);

/// Writes report.json, meta.json and the CSV tables into `dir`.
void write_outputs(const RunReport& report, const std::filesystem::path& dir, bool strict = false);

/// Runs fn(0..count-1) on up to `threads` worker threads.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace specflow::cli
