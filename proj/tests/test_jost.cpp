#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "specflow/jost.hpp"
#include "support.hpp"

using namespace testing;
using herm::HermitianMatrix;
using jost::GridSpec;
using path::OperatorPath;
using path::Profile;
using path::ProfileKind;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

OperatorPath ramp_path() { return one_term(scalar(-1.0), scalar(1.0), ProfileKind::LinearRamp, 0.0, 1.0); }

OperatorPath random_compact(std::uint64_t seed) {
  const herm::HermitianMatrix am = diag({-1.0, 0.8}).conjugated(herm::random_unitary(2, seed));
  const herm::HermitianMatrix ap = diag({0.7, 1.2}).conjugated(herm::random_unitary(2, seed + 1));
  return OperatorPath(am, {{Profile(ProfileKind::SmoothstepCompact, 0.0, 1.5), ap - am},
                           {Profile(ProfileKind::SmoothstepCompact, -0.5, 0.7), herm::random_hermitian(2, seed + 2, 0.3)},
                           {Profile(ProfileKind::SmoothstepCompact, 0.5, 0.7), -herm::random_hermitian(2, seed + 2, 0.3)}});
}

// Independent oracle for the scalar case: adaptive Dormand-Prince integration
// of -F'' + Q F = z F from +T down to -T, restarted at every kink of Q.
double scalar_a_oracle(const OperatorPath& p, double z, double T) {
  using State = std::array<double, 2>;
  const double kp = std::sqrt(std::pow(p.a_plus()(0, 0).real(), 2) - z);
  const double km = std::sqrt(std::pow(p.a_minus()(0, 0).real(), 2) - z);
  State y{std::exp(-kp * T), -kp * std::exp(-kp * T)};
  std::vector<double> cuts{T};
  const auto bps = p.breakpoints();
  for (auto it = bps.rbegin(); it != bps.rend(); ++it)
    if (*it < T && *it > -T) cuts.push_back(*it);
  cuts.push_back(-T);
  namespace ode = boost::numeric::odeint;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    auto rhs = [&](const State& s, State& ds, double t) {
      const double a = p.eval(t)(0, 0).real();
      const double da = p.deriv_toward(t, mid)(0, 0).real();
      ds[0] = s[1];
      ds[1] = (a * a - da - z) * s[0];
    };
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-14, 1e-14), rhs, y, cuts[k],
                            cuts[k + 1], -1e-3);
  }
  return std::exp(-km * T) * (km * y[0] - y[1]) / (2.0 * km);
}

}  // namespace

TEST_SUITE("jost") {

TEST_CASE("grid") {
  const GridSpec g(2.0, 5);
  CHECK(g.spacing() == 1.0);
  CHECK(g.node(0) == -2.0);
  CHECK(g.node(2) == 0.0);
  CHECK(g.node(4) == 2.0);
  CHECK(GridSpec::with_step(16.0, 1e-3).points() == 32001);
  CHECK(error_code_of([] { GridSpec(1.0, 4); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("constant scalar path: exact exponentials, free kernel") {
  const OperatorPath p(scalar(1.0));
  const GridSpec g(4.0, 4001);
  const jost::JostData j = jost::solve_jost(p, -1.0, g);
  double worst = 0.0;
  for (int k = 0; k < g.points(); k += 50) {
    const double t = g.node(k);
    worst = std::max(worst, std::abs(j.f_plus[static_cast<std::size_t>(k)](0, 0) - std::exp(-kSqrt2 * t)) /
                                std::exp(-kSqrt2 * t));
    CHECK(std::abs(jost::wronskian(j, k)(0, 0) - 2.0 * kSqrt2) < 1e-10);
    const jost::ResolventDiagonal r = jost::resolvent_diag(j, p, k);
    CHECK(std::abs(r.r(0, 0) - 1.0 / (2.0 * kSqrt2)) < 1e-10);
    CHECK(std::abs(r.r_tilde(0, 0) - r.r(0, 0)) < 1e-10);
  }
  CHECK(worst < 1e-10);
  const int last = g.points() - 1;
  CHECK(std::abs(jost::wronskian(j.f_plus[last], j.df_plus[last], j.f_plus[last], j.df_plus[last])(0, 0)) == 0.0);
  CHECK(jost::wronskian_constancy(j) < 1e-12);

  const jost::ScatteringCoefficients sc = jost::scattering_coefficients(jost::solve_jost(p, -1.0, GridSpec(2.0, 2001)));
  CHECK(std::abs(sc.a(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(sc.c(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(sc.b(0, 0)) < 1e-10);
  CHECK(std::abs(sc.d(0, 0)) < 1e-10);
  const jost::B7Residuals b7 = jost::check_b7(j);
  CHECK(b7.via_c <= 1e-10);
  CHECK(b7.via_a <= 1e-10);
}

TEST_CASE("matrix constant path has no reflection") {
  const OperatorPath p(diag({0.6, -0.9}).conjugated(herm::random_unitary(2, 8)));
  const jost::ScatteringCoefficients sc = jost::scattering_coefficients(jost::solve_jost(p, -2.0, GridSpec(2.0, 4001)));
  CHECK(herm::max_abs(sc.b) < 1e-10);
  CHECK(herm::max_abs(sc.d) < 1e-10);
  CHECK(herm::max_abs(sc.a - CMatrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("ramp path: constant Wronskian and transfer oracle") {
  const OperatorPath p = ramp_path();
  const jost::JostData j = jost::solve_jost(p, -1.0, GridSpec::with_step(6.0, 1e-3));
  CHECK(jost::wronskian_constancy(j) <= 1e-6);
  const jost::ScatteringCoefficients sc = jost::scattering_coefficients(j);
  CHECK(sc.reconstruction_residual <= 1e-8);
  const double a_oracle = scalar_a_oracle(p, -1.0, 6.0);
  CHECK(std::abs(sc.a(0, 0) - a_oracle) <= 1e-8 * std::abs(a_oracle));
}

TEST_CASE("random compact matrix path") {
  const OperatorPath p = random_compact(5);
  const jost::JostData j = jost::solve_jost(p, -1.0, GridSpec::with_step(8.0, 1e-3));
  const jost::B7Residuals b7 = jost::check_b7(j);
  CHECK(b7.via_c <= 1e-6);
  CHECK(b7.via_a <= 1e-6);
  CHECK(jost::wronskian_constancy(j) <= 1e-6);
  for (int k = 0; k < j.grid.points(); k += 997) {
    const jost::ResolventDiagonal r = jost::resolvent_diag(j, p, k);
    CHECK(herm::max_abs(r.r - r.r.adjoint()) <= 1e-8);
    CHECK(herm::max_abs(r.r_tilde - r.r_tilde.adjoint()) <= 1e-8);
  }
}

TEST_CASE("callias right-hand side") {
  CHECK(jost::callias_rhs(scalar(2.0), scalar(2.0), -1.0).value == 0.0);
  const jost::CalliasRhs s = jost::callias_rhs(scalar(1.0), scalar(-1.0), -1.0);
  CHECK(s.value == doctest::Approx(-1.0 / kSqrt2).epsilon(1e-15));
  CHECK(std::abs(s.kappa_form - s.value) <= 1e-12);
  CHECK(s.imag_part == 0.0);
  const jost::CalliasRhs two = jost::callias_rhs(HermitianMatrix::identity(2), -HermitianMatrix::identity(2), -1.0);
  CHECK(two.value == doctest::Approx(-kSqrt2).epsilon(1e-15));
  CHECK(error_code_of([] { jost::callias_rhs(scalar(1.0), scalar(-1.0), 0.0); }) == ErrorCode::InvalidArgument);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const jost::CalliasRhs r = jost::callias_rhs(herm::random_hermitian(3, seed), herm::random_hermitian(3, seed + 50),
                                                 -0.5 * static_cast<double>(seed));
    CHECK(std::abs(r.value - r.kappa_form) <= 1e-12);
    CHECK(std::abs(r.imag_part) <= 1e-14);
  }
}

TEST_CASE("callias identity on the scalar truncated tanh path") {
  const OperatorPath p = scalar_tanh().truncate(8.0);
  const jost::JostData j = jost::solve_jost(p, -1.0, GridSpec::with_step(16.0, 1e-3));
  const double rhs = jost::callias_rhs(p.a_plus(), p.a_minus(), -1.0).value;
  const Complex lb = jost::callias_lhs_boundary(j, p, 10.0);
  CHECK(std::abs(lb.real() - rhs) <= 1e-4);
  CHECK(std::abs(lb.real() + 1.0 / kSqrt2) <= 1e-4);
  CHECK(std::abs(lb.imag()) <= 1e-10);
  const Complex lq = jost::callias_lhs_quadrature(j, p);
  CHECK(std::abs(lq.real() + 1.0 / kSqrt2) <= 1e-3);

  // Beyond the support (|t| <= 9) the boundary value settles like e^{-2 kappa (R - 9)}.
  double prev = jost::callias_lhs_boundary(j, p, 9.0).real();
  for (double r : {10.0, 11.0, 12.0, 16.0}) {
    const double v = jost::callias_lhs_boundary(j, p, r).real();
    CHECK(std::abs(v - prev) <= std::exp(-2.0 * kSqrt2 * (r - 10.0)) * 1e-6 + 1e-11);
    prev = v;
  }

  // Integrand decays to nothing at the grid ends.
  for (int node : {0, j.grid.points() - 1}) {
    const jost::ResolventDiagonal r = jost::resolvent_diag(j, p, node);
    CHECK(std::abs((r.r_tilde - r.r).trace()) <= 1e-8);
  }
  CHECK(error_code_of([&] { jost::callias_lhs_boundary(j, p, 5.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("callias identity on constant and matrix paths") {
  const OperatorPath c(diag({1.0, -0.5}));
  const jost::JostData jc = jost::solve_jost(c, -2.0, GridSpec(4.0, 4001));
  CHECK(std::abs(jost::callias_lhs_boundary(jc, c, 4.0)) <= 1e-13);
  CHECK(std::abs(jost::callias_lhs_quadrature(jc, c)) <= 1e-13);

  const OperatorPath p = random_compact(11);
  for (double z : {-1.0, -2.0, -5.0}) {
    const jost::JostData j = jost::solve_jost(p, z, GridSpec::with_step(8.0, 1e-3));
    const double rhs = jost::callias_rhs(p.a_plus(), p.a_minus(), z).value;
    const Complex lb = jost::callias_lhs_boundary(j, p, 8.0);
    CHECK(std::abs(lb.real() - rhs) <= 1e-4 * (1.0 + std::abs(rhs)));
    CHECK(std::abs(jost::callias_lhs_quadrature(j, p).real() - lb.real()) <= 1e-3);
  }
}

TEST_CASE("guards") {
  const OperatorPath p = scalar_tanh();
  CHECK(error_code_of([&] { jost::solve_jost(p, -1.0, GridSpec(16.0, 101)); }) == ErrorCode::TruncateFirst);
  CHECK(error_code_of([&] { jost::solve_jost(p.truncate(4.0), 0.5, GridSpec(16.0, 101)); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { jost::solve_jost(p.truncate(4.0), -1.0, GridSpec(3.0, 101)); }) ==
        ErrorCode::InvalidArgument);
  // Widely spread kappa spectrum over a long interval.
  const OperatorPath wide(diag({0.5, 4.0}));
  CHECK(error_code_of([&] { jost::solve_jost(wide, -1.0, GridSpec(10.0, 101)); }) ==
        ErrorCode::DynamicRangeExceeded);
}

TEST_CASE("diagnostics csv") {
  const OperatorPath p(scalar(1.0));
  const jost::JostData j = jost::solve_jost(p, -1.0, GridSpec(1.0, 5));
  std::ostringstream os;
  jost::write_diagnostics_csv(os, j, p, 2);
  const std::string s = os.str();
  CHECK(s.rfind("t,tr_R,tr_R_tilde,wronskian_dev\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}

}  // TEST_SUITE
