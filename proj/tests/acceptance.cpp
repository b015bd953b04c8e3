// Acceptance suite: runs the seeded battery once and checks every criterion
// against its stated tolerance. One PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "abel_oracle.hpp"
#include "specflow/jost.hpp"
#include "specflow/random.hpp"
#include "specflow/runner.hpp"
#include "specflow/ssf.hpp"

using namespace specflow;

namespace {

constexpr std::uint64_t kBatterySeed = 1;
constexpr int kBatteryCount = 9;

struct Tally {
  int checked = 0;
  int failed = 0;
  double worst = 0.0;  // largest residual / tolerance seen (0 for integer checks)
  std::string first_failure;

  void add(bool ok, const std::string& what, double ratio = 0.0) {
    ++checked;
    worst = std::max(worst, ratio);
    if (!ok) {
      if (failed == 0) first_failure = what;
      ++failed;
    }
  }
  void add(const cli::Record& r) {
    const double ratio = r.tolerance > 0.0 ? r.residual / r.tolerance : 0.0;
    add(r.pass, r.name + (r.error.empty() ? "" : " (" + r.error + ")"), ratio);
  }
};

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

template <class Pred>
void collect(Tally& t, const std::vector<cli::RunReport>& reports, Pred&& pred) {
  for (const auto& rep : reports)
    for (const auto& r : rep.records)
      if (pred(r)) {
        cli::Record copy = r;
        copy.name = rep.config.name + "/" + r.name;
        t.add(copy);
      }
}

bool report(int id, const char* title, const Tally& t, const std::string& extra = "") {
  const bool ok = t.failed == 0 && t.checked > 0;
  std::printf("%s  criterion %d  %-28s checks=%d failed=%d worst_ratio=%.3g%s%s\n", ok ? "PASS" : "FAIL", id, title,
              t.checked, t.failed, t.worst, extra.c_str(),
              t.failed ? ("  first: " + t.first_failure).c_str() : "");
  return ok;
}

std::string seconds(const char* key, double s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " %s=%.1fs", key, s);
  return buf;
}

double wall(const std::vector<cli::RunReport>& reports, const char* experiment) {
  double s = 0.0;
  for (const auto& r : reports) {
    const auto it = r.wall_seconds.find(experiment);
    if (it != r.wall_seconds.end()) s += it->second;
  }
  return s;
}

herm::HermitianMatrix spectrum_in(SplitMix64& rng, Eigen::Index d, double lo, double hi) {
  std::vector<double> ev(static_cast<std::size_t>(d));
  for (double& v : ev) v = rng.uniform(lo, hi);
  return herm::HermitianMatrix::diagonal(ev).conjugated(herm::random_unitary(d, rng.next()));
}

}  // namespace

int main() {
  const auto battery = cli::generate_battery(kBatterySeed, kBatteryCount);
  std::vector<cli::RunReport> reports;
  for (const auto& c : battery) reports.push_back(cli::run_scenario(c));

  bool all = true;

  {  // 1. Callias identity battery plus the scalar anchor.
    Tally t;
    collect(t, reports, [](const cli::Record& r) {
      return starts_with(r.name, "callias.boundary") || starts_with(r.name, "callias.quadrature") ||
             starts_with(r.name, "callias.discrete") || r.name.find("callias[") == 0;
    });
    const double rhs = jost::callias_rhs(herm::HermitianMatrix::scalar(1.0), herm::HermitianMatrix::scalar(-1.0), -1.0).value;
    t.add(std::abs(rhs + 1.0 / std::sqrt(2.0)) <= 1e-12, "anchor rhs");
    const path::OperatorPath anchor =
        path::OperatorPath(herm::HermitianMatrix::scalar(-1.0),
                           {{path::Profile(path::ProfileKind::TanhSigmoid, 0.0, 1.0), herm::HermitianMatrix::scalar(2.0)}})
            .truncate(8.0);
    const jost::JostData j = jost::solve_jost(anchor, -1.0, jost::GridSpec::with_step(16.0, 1e-3));
    const double lb = jost::callias_lhs_boundary(j, anchor, 16.0).real();
    t.add(std::abs(lb - rhs) <= 1e-4 * (1.0 + std::abs(rhs)), "anchor boundary", std::abs(lb - rhs) / 1e-4);
    const double s = wall(reports, "callias");
    t.add(s <= 60.0, "callias runtime above 60 s");
    all &= report(1, "callias identity", t, seconds("runtime", s));
  }

  {  // 2. Index agreement across four routes.
    Tally t;
    std::vector<bool> seen(5, false);
    collect(t, reports, [](const cli::Record& r) { return r.name == "index.agreement"; });
    for (const auto& rep : reports)
      for (const auto& r : rep.records)
        if (r.name == "index.agreement")
          for (const auto& [k, v] : r.values)
            if (k == "ssf_at_zero" && std::abs(v) <= 2) seen[static_cast<std::size_t>(v + 2)] = true;
    for (int f = -2; f <= 2; ++f) t.add(seen[static_cast<std::size_t>(f + 2)], "target " + std::to_string(f) + " not covered");
    const double s = wall(reports, "index");
    t.add(s <= 30.0, "index runtime above 30 s");
    all &= report(2, "index theorem", t, seconds("runtime", s));
  }

  {  // 3. Gap identity plus the Abel closed form against quadrature.
    Tally t;
    collect(t, reports, [](const cli::Record& r) { return starts_with(r.name, "ssf-gap[lambda="); });
    SplitMix64 rng(2024);
    for (int k = 0; k < 100; ++k) {
      const int jumps = 1 + static_cast<int>(rng.next() % 6);
      std::vector<std::pair<double, double>> js;
      for (int i = 0; i < jumps; ++i)
        js.emplace_back(rng.uniform(-2.0, 2.0), static_cast<double>(static_cast<int>(rng.next() % 5) - 2));
      const ssf::StepFunction eta = ssf::StepFunction::from_jumps(js, static_cast<double>(static_cast<int>(rng.next() % 3) - 1));
      const double lambda = rng.uniform(0.05, 4.0);
      const double diff = std::abs(ssf::abel_transform(eta, lambda) - testing::abel_quadrature(eta, lambda));
      t.add(diff <= 1e-9, "abel sample " + std::to_string(k), diff / 1e-9);
    }
    all &= report(3, "gap identity", t);
  }

  {  // 4. Trace formula on seeded pairs with spectra in [-3, 3].
    Tally t;
    collect(t, reports, [](const cli::Record& r) { return starts_with(r.name, "trace-formula[f="); });
    struct Fn {
      std::function<double(double)> f, df;
    };
    const std::vector<Fn> fns{
        {[](double s) { return std::atan(s); }, [](double s) { return 1.0 / (1.0 + s * s); }},
        {[](double s) { return std::exp(-s * s); }, [](double s) { return -2.0 * s * std::exp(-s * s); }},
        {[](double s) { return s * s * s - 2.0 * s; }, [](double s) { return 3.0 * s * s - 2.0; }},
        {[](double s) { return 1.0 / (1.0 + std::exp(-2.0 * s)); },
         [](double s) { return 1.0 / (1.0 + std::cosh(2.0 * s)); }},
    };
    SplitMix64 rng(77);
    for (int k = 0; k < 20; ++k) {
      const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next() % 4);
      const herm::HermitianMatrix ap = spectrum_in(rng, d, -3.0, 3.0);
      const herm::HermitianMatrix am = spectrum_in(rng, d, -3.0, 3.0);
      for (std::size_t i = 0; i < fns.size(); ++i) {
        const ssf::TraceFormulaCheck c = ssf::verify_trace_formula(ap, am, fns[i].f, fns[i].df);
        t.add(c.residual <= 1e-10, "pair " + std::to_string(k) + " f" + std::to_string(i), c.residual / 1e-10);
      }
    }
    all &= report(4, "trace formula", t);
  }

  {  // 5. Jost self-consistency and the RK4 order proxy.
    Tally t;
    collect(t, reports, [](const cli::Record& r) { return starts_with(r.name, "jost."); });
    all &= report(5, "jost self-consistency", t);
  }

  {  // 6. Spectral flow equals the SSF, reversal flips the sign.
    Tally t;
    collect(t, reports, [](const cli::Record& r) { return starts_with(r.name, "flow[lambda="); });
    all &= report(6, "spectral flow = ssf", t);
  }

  {  // 7. Truncation and compression sweeps.
    Tally t;
    collect(t, reports, [](const cli::Record& r) { return r.experiment == "converge"; });
    all &= report(7, "approximation convergence", t);
  }

  {  // 8. Determinism of the CSV bodies.
    Tally t;
    for (std::size_t i : {std::size_t{0}, std::size_t{4}}) {
      const cli::RunReport again = cli::run_scenario(battery[i], {.threads = 2});
      t.add(!reports[i].tables.empty(), battery[i].name + " wrote no tables");
      t.add(again.tables == reports[i].tables, battery[i].name + " tables differ");
      t.add(cli::report_json(again) == cli::report_json(reports[i]), battery[i].name + " report differs");
    }
    all &= report(8, "determinism", t);
  }

  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
