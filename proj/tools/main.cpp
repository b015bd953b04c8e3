// specflow: scenario runner. Exit codes: 0 pass, 1 numerical failure,
// 2 usage or configuration error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "specflow/error.hpp"
#include "specflow/runner.hpp"
#include "specflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace specflow;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

void print_summary(const cli::RunReport& report, bool strict, std::ostream& os) {
  int passed = 0;
  for (const auto& r : report.records) passed += r.pass ? 1 : 0;
  os << (report.pass(strict) ? "PASS " : "FAIL ") << report.config.name << "  " << passed << "/"
     << report.records.size() << " records";
  if (!report.warnings.empty()) os << ", " << report.warnings.size() << " warning(s)";
  os << '\n';
  for (const auto& r : report.records) {
    if (r.pass) continue;
    os << "  failed " << r.name << "  residual " << r.residual << "  tolerance " << r.tolerance;
    if (!r.error.empty()) os << "  [" << r.error << "]";
    os << '\n';
  }
  for (const auto& w : report.warnings) os << "  warning: " << w << '\n';
}

int cmd_run(const std::string& config_file, const std::string& out, int threads, bool strict) {
  cli::ScenarioConfig config;
  try {
    config = cli::load_config(config_file);
  } catch (const Error& e) {
    std::cerr << "specflow: " << e.what() << '\n';
    return kExitUsage;
  }
  const fs::path dir = !out.empty() ? fs::path(out) : !config.output.empty() ? fs::path(config.output)
                                                                             : fs::path("out") / config.name;
  const cli::RunReport report = cli::run_scenario(config, {threads});
  cli::write_outputs(report, dir, strict);
  print_summary(report, strict, std::cout);
  std::cout << "wrote " << dir.string() << '\n';
  return report.pass(strict) ? kExitPass : kExitFail;
}

int cmd_battery(std::uint64_t seed, int count, const std::string& out, int threads, bool strict) {
  std::vector<cli::ScenarioConfig> configs;
  try {
    configs = cli::generate_battery(seed, count);
  } catch (const Error& e) {
    std::cerr << "specflow: " << e.what() << '\n';
    return kExitUsage;
  }
  const fs::path root = out.empty() ? fs::path("battery-out") : fs::path(out);
  std::vector<cli::RunReport> reports(configs.size());
  std::mutex io;
  cli::parallel_for(static_cast<int>(configs.size()), threads, [&](int k) {
    const auto& c = configs[static_cast<std::size_t>(k)];
    reports[static_cast<std::size_t>(k)] = cli::run_scenario(c, {1});
    const fs::path dir = root / c.name;
    cli::write_outputs(reports[static_cast<std::size_t>(k)], dir, strict);
    std::ofstream(dir / "config.json") << cli::to_json(c);
    std::lock_guard lock(io);
    print_summary(reports[static_cast<std::size_t>(k)], strict, std::cout);
  });

  std::sort(reports.begin(), reports.end(),
            [](const cli::RunReport& a, const cli::RunReport& b) { return a.config.name < b.config.name; });
  nlohmann::json summary = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reports) {
    summary.push_back({{"name", r.config.name}, {"pass", r.pass(strict)}, {"records", r.records.size()}});
    all = all && r.pass(strict);
  }
  std::ofstream(root / "battery.json") << nlohmann::json{{"seed", seed}, {"count", count}, {"strict", strict},
                                                          {"pass", all}, {"scenarios", summary}}
                                              .dump(2)
                                       << '\n';
  std::cout << (all ? "battery PASS" : "battery FAIL") << " (" << reports.size() << " scenarios) -> "
            << root.string() << '\n';
  return all ? kExitPass : kExitFail;
}

int cmd_show(const std::string& file) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << "specflow: cannot open " << file << '\n';
    return kExitUsage;
  }
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "specflow: " << file << " is not valid JSON: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!root.contains("records") || !root.contains("pass")) {
    std::cerr << "specflow: " << file << " is not a run report\n";
    return kExitUsage;
  }
  std::cout << root["config"].value("name", "?") << "  version " << root.value("version", "?") << '\n';
  for (const auto& r : root["records"]) {
    const bool pass = r.value("pass", false);
    std::cout << (pass ? "  PASS  " : "  FAIL  ") << r.value("name", "?");
    if (r.contains("residual") && r["residual"].is_number())
      std::cout << "  residual " << r["residual"].get<double>() << "  tolerance " << r["tolerance"].get<double>();
    if (r.contains("error")) std::cout << "  [" << r["error"].get<std::string>() << "]";
    std::cout << '\n';
  }
  for (const auto& w : root["warnings"]) std::cout << "  warning: " << w.get<std::string>() << '\n';
  const bool pass = root["pass"].get<bool>();
  std::cout << (pass ? "overall PASS" : "overall FAIL") << '\n';
  return pass ? kExitPass : kExitFail;
}

int cmd_generate(std::uint64_t seed, int dim, int target, const std::string& out) {
  try {
    const std::string text = cli::to_json(cli::generate_random_scenario(seed, dim, target));
    if (out.empty()) {
      std::cout << text;
    } else {
      std::ofstream(out) << text;
    }
  } catch (const Error& e) {
    std::cerr << "specflow: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral flow, spectral shift and index verification runner"};
  app.require_subcommand(1);

  std::string out;
  int threads = 1;
  bool strict = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));
    sub->add_flag("--strict", strict, "Treat warnings as failures");
  };

  std::string config_file;
  auto* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("config", config_file, "Scenario JSON")->required();
  add_common(run);

  std::uint64_t seed = 1;
  int count = 9;
  auto* battery = app.add_subcommand("battery", "Run generated scenarios");
  battery->add_option("--seed", seed, "Battery seed")->required();
  battery->add_option("--count", count, "Number of scenarios")->required()->check(CLI::Range(1, 1000));
  add_common(battery);

  std::string report_file;
  auto* show = app.add_subcommand("show-report", "Print a report.json");
  show->add_option("report", report_file, "Report JSON")->required();

  int dim = 1, target = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a generated scenario config");
  gen->add_option("--seed", seed, "Scenario seed")->required();
  gen->add_option("--dim", dim, "Dimension")->required()->check(CLI::Range(1, 64));
  gen->add_option("--target", target, "Flow target")->required();
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_file, out, threads, strict);
    if (*battery) return cmd_battery(seed, count, out, threads, strict);
    if (*show) return cmd_show(report_file);
    if (*gen) return cmd_generate(seed, dim, target, gen_out);
  } catch (const Error& e) {
    std::cerr << "specflow: " << e.what() << '\n';
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "specflow: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
