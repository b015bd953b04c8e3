#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specflow/path.hpp"

namespace specflow::cli {

enum class Experiment { Callias, Index, SsfGap, Flow, TraceFormula, Converge };

std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view name);
std::vector<Experiment> all_experiments();

inline constexpr int kSchemaVersion = 1;

/// One verification scenario. Matrices are stored resolved (explicit
/// entries); `to_json` writes them back in that form, so a config echo
/// parses to the same values bit for bit.
struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  int dimension = 1;
  herm::HermitianMatrix a_minus;
  std::vector<path::PathTerm> terms;
  std::optional<double> truncation;  // radius n of the compact cut-off
  double grid_T = 16.0;              // discretization and Jost half width
  int grid_N = 2801;                 // discretization nodes (odd)
  double jost_step = 1e-3;           // RK4 step of the Jost solver
  std::vector<double> z_list{-1.0, -2.0, -5.0};
  std::vector<double> lambda_list;   // empty: a/4, a/2, 3a/4
  std::vector<Experiment> experiments = all_experiments();
  std::uint64_t seed = 0;
  std::string output;

  /// The path as written, without truncation.
  path::OperatorPath base_path() const;
  /// The path the experiments run on: truncated when `truncation` is set.
  path::OperatorPath build_path() const;
  bool wants(Experiment e) const;
};

/// Throws Error(ConfigError) with a message naming the offending field.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& file);
std::string to_json(const ScenarioConfig& config);

/// Random scenario whose endpoints carry exactly `flow_target` more
/// negative eigenvalues at -inf than at +inf, so xi(0; A+, A-) = flow_target.
/// Deterministic in `seed`.
ScenarioConfig generate_random_scenario(std::uint64_t seed, int dimension, int flow_target);

/// The battery: scenario i has dimension 1 + i % 3 and cycles through the
/// flow targets {1, -1, 2, -2, 0} (clamped to the dimension).
std::vector<ScenarioConfig> generate_battery(std::uint64_t seed, int count);

}  // namespace specflow::cli
