#include <cmath>

#include "specflow/flow.hpp"
#include "specflow/ssf.hpp"
#include "support.hpp"

using namespace testing;
using path::OperatorPath;
using path::Profile;
using path::ProfileKind;

namespace {

std::vector<double> uniform_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return g;
}

// Signed tanh pair: diag(tanh t, -tanh t).
OperatorPath opposite_pair() {
  return OperatorPath(diag({-1.0, 1.0}), {{Profile(ProfileKind::TanhSigmoid, 0.0, 1.0), diag({2.0, -2.0})}});
}

// Same endpoints, but the two crossings happen at t = -1 and t = 1.
OperatorPath staggered_pair() {
  return OperatorPath(diag({-1.0, 1.0}), {{Profile(ProfileKind::TanhSigmoid, -1.0, 1.0), diag({2.0, 0.0})},
                                          {Profile(ProfileKind::TanhSigmoid, 1.0, 1.0), diag({0.0, -2.0})}});
}

// Oracle: net count change on a much finer grid, using Eigen's solver.
int fine_grid_flow(const OperatorPath& p, double level, double lo, double hi) {
  int prev = -1, flow = 0;
  for (double t : uniform_grid(lo, hi, 20001)) {
    const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(p.eval(t).matrix()).eigenvalues();
    const int n = static_cast<int>((ev.array() < level).count());
    if (prev >= 0) flow += prev - n;
    prev = n;
  }
  return flow;
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("eigenvalue branches") {
  const OperatorPath constant(diag({2.0, -1.0}));
  const Eigen::MatrixXd b = flow::eigenvalue_branches(constant, uniform_grid(-1.0, 1.0, 5));
  for (Eigen::Index k = 0; k < b.rows(); ++k) {
    CHECK(b(k, 0) == doctest::Approx(-1.0));
    CHECK(b(k, 1) == doctest::Approx(2.0));
  }
  const std::vector<double> three{-6.0, 0.0, 6.0};
  const Eigen::MatrixXd s = flow::eigenvalue_branches(scalar_tanh(), three);
  CHECK(s(0, 0) == doctest::Approx(std::tanh(-6.0)));
  CHECK(std::abs(s(1, 0)) < 1e-15);
  CHECK(s(2, 0) == doctest::Approx(std::tanh(6.0)));
  const Eigen::MatrixXd o = flow::eigenvalue_branches(opposite_pair(), uniform_grid(-3.0, 3.0, 7));
  for (Eigen::Index k = 0; k < o.rows(); ++k) CHECK(o(k, 0) == doctest::Approx(-o(k, 1)));
}

TEST_CASE("spectral flow examples") {
  const OperatorPath constant(diag({2.0, -1.0}));
  const auto g0 = flow::default_flow_grid(constant);
  const flow::FlowResult c = flow::spectral_flow(constant, 0.0, g0);
  CHECK(c.flow == 0);
  CHECK(c.events.empty());

  const OperatorPath p = scalar_tanh();
  const flow::FlowResult s = flow::spectral_flow(p, 0.0, flow::default_flow_grid(p));
  CHECK(s.flow == 1);
  REQUIRE(s.events.size() == 1);
  CHECK(std::abs(s.events[0].t_cross) < 1e-6);
  CHECK(s.events[0].direction == 1);
  CHECK(s.events[0].multiplicity == 1);
  CHECK(s.events[0].bracket_width <= 1e-6);

  // Simultaneous opposite crossings leave the count unchanged.
  const OperatorPath pair = opposite_pair();
  const flow::FlowResult o = flow::spectral_flow(pair, 0.0, flow::default_flow_grid(pair));
  CHECK(o.flow == 0);

  const OperatorPath st = staggered_pair();
  const flow::FlowResult g = flow::spectral_flow(st, 0.0, flow::default_flow_grid(st));
  CHECK(g.flow == 0);
  REQUIRE(g.events.size() == 2);
  CHECK(g.events[0].direction == -g.events[1].direction);
  CHECK(g.events[0].t_cross == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(g.events[1].t_cross == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("double crossing has multiplicity two") {
  const OperatorPath p = one_term(diag({-1.0, -1.0}), diag({1.0, 1.0}));
  const flow::FlowResult r = flow::spectral_flow(p, 0.0, flow::default_flow_grid(p));
  CHECK(r.flow == 2);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].multiplicity == 2);
}

TEST_CASE("flow equals the SSF and flips under reversal") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seed % 3);
    const OperatorPath p(herm::random_hermitian(d, seed, 1.5),
                         {{Profile(ProfileKind::TanhSigmoid, 0.0, 0.8), herm::random_hermitian(d, seed + 7, 1.5)},
                          {Profile(ProfileKind::SmoothstepCompact, 1.0, 1.0), herm::random_hermitian(d, seed + 9)}});
    const ssf::StepFunction xi = ssf::ssf_pair(p.a_plus(), p.a_minus());
    const auto grid = flow::default_flow_grid(p);
    const OperatorPath rev = p.reversed();
    const auto grid_rev = flow::default_flow_grid(rev);
    for (double level : {-1.3, -0.45, 0.05, 0.77, 1.9}) {
      double expect;
      try {
        expect = ssf::eval_ssf(xi, level);
      } catch (const Error&) {
        continue;
      }
      const int f = flow::spectral_flow(p, level, grid).flow;
      CHECK(f == expect);
      CHECK(flow::spectral_flow(rev, level, grid_rev).flow == -f);
      CHECK(f == fine_grid_flow(p, level, grid.front(), grid.back()));
    }
  }
}

TEST_CASE("refined grid gives the same integer") {
  const OperatorPath p(herm::random_hermitian(3, 77, 1.5),
                       {{Profile(ProfileKind::TanhSigmoid, 0.3, 0.6), herm::random_hermitian(3, 78, 2.0)}});
  const auto coarse = flow::default_flow_grid(p, 0.1);
  const auto fine = flow::default_flow_grid(p, 0.05);
  for (double level : {-0.8, 0.1, 0.9}) {
    try {
      CHECK(flow::spectral_flow(p, level, coarse).flow == flow::spectral_flow(p, level, fine).flow);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OnEigenvalue);
    }
  }
}

TEST_CASE("endpoint level is rejected") {
  const OperatorPath p = scalar_tanh().truncate(4.0);
  CHECK(error_code_of([&] { flow::spectral_flow(p, 1.0, flow::default_flow_grid(p)); }) == ErrorCode::OnEigenvalue);
}

TEST_CASE("csv") {
  std::ostringstream os;
  const std::vector<flow::CrossingEvent> ev{{0.5, 1, 2, 1e-7}};
  flow::write_csv(os, ev);
  CHECK(os.str() == "t_cross,direction,multiplicity\n0.5,1,2\n");
}

}  // TEST_SUITE
