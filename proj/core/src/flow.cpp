#include "specflow/flow.hpp"

#include <cmath>
#include <sstream>

#include "specflow/csv.hpp"
#include "specflow/error.hpp"

namespace specflow::flow {

namespace {

class Counter {
 public:
  Counter(const path::OperatorPath& p, double level) : path_(p), level_(level) {}

  int at(double t) const { return herm::count_below(herm::eigenvalues(path_.eval(t)), level_); }

  // Count at a point near t inside (lo, hi); nudges off an exact level hit.
  std::pair<double, int> near(double t, double lo, double hi) const {
    try {
      return {t, at(t)};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OnEigenvalue) throw;
    }
    for (int j = 1; j <= 8; ++j) {
      for (double sgn : {1.0, -1.0}) {
        const double s = t + sgn * (hi - lo) * 0.05 * j;
        if (s <= lo || s >= hi) continue;
        try {
          return {s, at(s)};
        } catch (const Error& e) {
          if (e.code() != ErrorCode::OnEigenvalue) throw;
        }
      }
    }
    std::ostringstream os;
    os << "level " << level_ << " stays on the spectrum throughout [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::UnresolvedCrossing, os.str());
  }

 private:
  const path::OperatorPath& path_;
  double level_;
};

struct Refiner {
  const Counter& counter;
  double tol;
  int dim;
  int max_events;
  std::vector<CrossingEvent>& out;
  int emitted = 0;

  void run(double lo, double hi, int clo, int chi) {
    if (clo == chi) return;
    const int jump = clo - chi;
    if (std::abs(jump) > dim) throw Error(ErrorCode::InternalConsistency, "count jump exceeds dimension");
    if (hi - lo <= tol) {
      if (++emitted > max_events) {
        std::ostringstream os;
        os << "more than " << max_events << " crossings in bracket ending at [" << lo << ", " << hi << "]";
        throw Error(ErrorCode::UnresolvedCrossing, os.str());
      }
      out.push_back({0.5 * (lo + hi), jump > 0 ? +1 : -1, std::abs(jump), hi - lo});
      return;
    }
    const auto [mid, cmid] = counter.near(0.5 * (lo + hi), lo, hi);
    run(lo, mid, clo, cmid);
    run(mid, hi, cmid, chi);
  }
};

}  // namespace

Eigen::MatrixXd eigenvalue_branches(const path::OperatorPath& p, std::span<const double> t_grid) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(t_grid.size()), p.dim());
  for (std::size_t k = 0; k < t_grid.size(); ++k)
    rows.row(static_cast<Eigen::Index>(k)) = herm::eigenvalues(p.eval(t_grid[k])).transpose();
  return rows;
}

std::vector<double> default_flow_grid(const path::OperatorPath& p, double spacing) {
  const double r = p.support_radius() + 1.0;
  const int n = std::max(2, static_cast<int>(std::ceil(2.0 * r / spacing))) + 1;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = -r + 2.0 * r * k / (n - 1);
  grid.back() = r;
  return grid;
}

FlowResult spectral_flow(const path::OperatorPath& p, double level, std::span<const double> t_grid,
                         double refine_tol) {
  return spectral_flow(p, level, t_grid, eigenvalue_branches(p, t_grid), refine_tol);
}

FlowResult spectral_flow(const path::OperatorPath& p, double level, std::span<const double> t_grid,
                         const Eigen::MatrixXd& branches, double refine_tol) {
  if (t_grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "flow grid needs at least two nodes");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) throw Error(ErrorCode::InvalidArgument, "flow grid must be increasing");
  const double r = p.support_radius();
  if (t_grid.front() > -r - 1.0 + 1e-12 || t_grid.back() < r + 1.0 - 1e-12) {
    if (!p.terms().empty()) throw Error(ErrorCode::InvalidArgument, "flow grid must cover [-T0 - 1, T0 + 1]");
  }
  if (!(refine_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "refine_tol must be positive");

  const Counter counter(p, level);
  auto row_count = [&](std::size_t k) {
    const RVector ev = branches.row(static_cast<Eigen::Index>(k)).transpose();
    return herm::count_below(ev, level);
  };

  // Endpoint counts must be unambiguous.
  const int c_first = row_count(0);
  const int c_last = row_count(t_grid.size() - 1);

  std::vector<double> ts{t_grid.front()};
  std::vector<int> counts{c_first};
  for (std::size_t k = 1; k + 1 < t_grid.size(); ++k) {
    try {
      counts.push_back(row_count(k));
      ts.push_back(t_grid[k]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OnEigenvalue) throw;
      const auto [t, c] = counter.near(t_grid[k], t_grid[k - 1], t_grid[k + 1]);
      ts.push_back(t);
      counts.push_back(c);
    }
  }
  ts.push_back(t_grid.back());
  counts.push_back(c_last);

  FlowResult result;
  const int dim = static_cast<int>(p.dim());
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    if (counts[k] == counts[k + 1]) continue;
    Refiner refiner{counter, refine_tol, dim, 4 * dim + 4, result.events};
    refiner.run(ts[k], ts[k + 1], counts[k], counts[k + 1]);
  }
  for (const auto& e : result.events) result.flow += e.direction * e.multiplicity;
  if (result.flow != c_first - c_last)
    throw Error(ErrorCode::InternalConsistency, "crossing events do not sum to the net count change");
  return result;
}

void write_csv(std::ostream& os, std::span<const CrossingEvent> events) {
  os << "t_cross,direction,multiplicity\n";
  for (const auto& e : events) os << fmt_double(e.t_cross) << ',' << e.direction << ',' << e.multiplicity << '\n';
}

}  // namespace specflow::flow
