#include "specflow/jost.hpp"

#include <cmath>
#include <sstream>

#include "specflow/csv.hpp"
#include "specflow/error.hpp"
#include "specflow/ode.hpp"

namespace specflow::jost {

namespace {

CMatrix inverse_checked(const CMatrix& m, const char* what) {
  const RVector s = herm::singular_values(m);
  if (s.size() == 0 || !(s(s.size() - 1) > 1e-14 * s(0)))
    throw Error(ErrorCode::SingularSystem, std::string(what) + " is numerically singular");
  return m.partialPivLu().inverse();
}

double condition_number(const CMatrix& m) {
  const RVector s = herm::singular_values(m);
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

double rel_diff(const CMatrix& x, const CMatrix& ref) {
  const double n = ref.norm();
  return n > 0.0 ? (x - ref).norm() / n : (x - ref).norm();
}

}  // namespace

GridSpec::GridSpec(double half_width, int points) : half_width_(half_width), points_(points) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw Error(ErrorCode::InvalidArgument, "grid half width must be positive");
  if (points < 3 || points % 2 == 0) throw Error(ErrorCode::InvalidArgument, "grid needs an odd number >= 3 of points");
  spacing_ = 2.0 * half_width / (points - 1);
}

GridSpec GridSpec::with_step(double half_width, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  const int half = static_cast<int>(std::ceil(half_width / h - 1e-9));
  return GridSpec(half_width, 2 * std::max(half, 1) + 1);
}

double GridSpec::node(int k) const {
  if (k == 0) return -half_width_;
  if (k == points_ - 1) return half_width_;
  return (k - mid()) * spacing_;
}

JostData solve_jost(const path::OperatorPath& p, double z, const GridSpec& grid) {
  if (!(z < 0.0)) throw Error(ErrorCode::InvalidArgument, "Jost solutions are built for real z < 0");
  if (!p.exactly_compact())
    throw Error(ErrorCode::TruncateFirst, "path has non-compact profiles; truncate it before solving");
  const double t_max = grid.half_width();
  if (p.support_radius() > t_max + 1e-12)
    throw Error(ErrorCode::InvalidArgument, "grid half width is smaller than the path support radius");

  const Eigen::Index d = p.dim();
  JostData j;
  j.z = z;
  j.grid = grid;
  std::tie(j.a_minus, j.a_plus) = p.endpoints();
  const herm::EigenDecomposition ed_plus = herm::eig(j.a_plus);
  const herm::EigenDecomposition ed_minus = herm::eig(j.a_minus);
  auto kap = [z](double s) { return std::sqrt(s * s - z); };
  j.kappa_plus = herm::apply_real_function(ed_plus, kap);
  j.kappa_minus = herm::apply_real_function(ed_minus, kap);

  double kmin = std::numeric_limits<double>::infinity();
  double kmax = 0.0;
  for (const auto* ed : {&ed_plus, &ed_minus})
    for (Eigen::Index k = 0; k < d; ++k) {
      kmin = std::min(kmin, kap(ed->values(k)));
      kmax = std::max(kmax, kap(ed->values(k)));
    }
  if (kmax * 2.0 * t_max > kMaxDynamicRange || (kmax - kmin) * 2.0 * t_max > 60.0) {
    std::ostringstream os;
    os << "kappa in [" << kmin << ", " << kmax << "] with T = " << t_max
       << " exceeds the representable dynamic range";
    throw Error(ErrorCode::DynamicRangeExceeded, os.str());
  }

  const CMatrix id = CMatrix::Identity(d, d);
  const std::vector<double> bps = p.breakpoints();
  const ode::Generator gen = [&](double t, double inside) {
    const CMatrix a = p.eval(t).matrix();
    const CMatrix q = a * a - p.deriv_toward(t, inside).matrix();
    CMatrix g = CMatrix::Zero(2 * d, 2 * d);
    g.topRightCorner(d, d) = id;
    g.bottomLeftCorner(d, d) = q - z * id;
    return g;
  };

  const int n = grid.points();
  j.f_plus.resize(static_cast<std::size_t>(n));
  j.df_plus.resize(static_cast<std::size_t>(n));
  j.f_minus.resize(static_cast<std::size_t>(n));
  j.df_minus.resize(static_cast<std::size_t>(n));

  // F_+(T) = e^{-kappa_+ T}, integrated backward.
  {
    CMatrix y(2 * d, d);
    y.topRows(d) = herm::apply_function(ed_plus, [&](double s) { return Complex(std::exp(-kap(s) * t_max)); });
    y.bottomRows(d) = -j.kappa_plus.matrix() * y.topRows(d);
    for (int k = n - 1;; --k) {
      j.f_plus[static_cast<std::size_t>(k)] = y.topRows(d);
      j.df_plus[static_cast<std::size_t>(k)] = y.bottomRows(d);
      if (k == 0) break;
      y = ode::rk4_step(gen, y, grid.node(k), grid.node(k - 1), bps);
    }
  }
  // F_-(-T) = e^{-kappa_- T}, integrated forward.
  {
    CMatrix y(2 * d, d);
    y.topRows(d) = herm::apply_function(ed_minus, [&](double s) { return Complex(std::exp(-kap(s) * t_max)); });
    y.bottomRows(d) = j.kappa_minus.matrix() * y.topRows(d);
    for (int k = 0;; ++k) {
      j.f_minus[static_cast<std::size_t>(k)] = y.topRows(d);
      j.df_minus[static_cast<std::size_t>(k)] = y.bottomRows(d);
      if (k == n - 1) break;
      y = ode::rk4_step(gen, y, grid.node(k), grid.node(k + 1), bps);
    }
  }

  // Mode splitting at the far ends:
  //   F_+(-T) = e^{kappa_- T} a + e^{-kappa_- T} b,  F_-(T) = e^{kappa_+ T} c + e^{-kappa_+ T} d.
  auto fn = [&](const herm::EigenDecomposition& ed, double sign) {
    return herm::apply_function(ed, [&, sign](double s) {
      const double k = kap(s);
      return Complex(std::exp(sign * k * t_max) / (2.0 * k));
    });
  };
  const CMatrix& fp = j.f_plus.front();
  const CMatrix& dfp = j.df_plus.front();
  const CMatrix& fm = j.f_minus.back();
  const CMatrix& dfm = j.df_minus.back();
  const CMatrix& km = j.kappa_minus.matrix();
  const CMatrix& kp = j.kappa_plus.matrix();
  auto& co = j.coeffs;
  co.a = fn(ed_minus, -1.0) * (km * fp - dfp);
  co.b = fn(ed_minus, +1.0) * (km * fp + dfp);
  co.c = fn(ed_plus, -1.0) * (kp * fm + dfm);
  co.d = fn(ed_plus, +1.0) * (kp * fm - dfm);

  auto expm = [&](const herm::EigenDecomposition& ed, double sign) {
    return herm::apply_function(ed, [&, sign](double s) { return Complex(std::exp(sign * kap(s) * t_max)); });
  };
  const CMatrix em_up = expm(ed_minus, +1.0), em_dn = expm(ed_minus, -1.0);
  const CMatrix ep_up = expm(ed_plus, +1.0), ep_dn = expm(ed_plus, -1.0);
  co.reconstruction_residual = std::max(
      {rel_diff(em_up * co.a + em_dn * co.b, fp), rel_diff(km * (-em_up * co.a + em_dn * co.b), dfp),
       rel_diff(ep_up * co.c + ep_dn * co.d, fm), rel_diff(kp * (ep_up * co.c - ep_dn * co.d), dfm)});

  j.w_ref = wronskian(j, grid.mid());
  return j;
}

CMatrix wronskian(const CMatrix& f, const CMatrix& df, const CMatrix& g, const CMatrix& dg) {
  return f.adjoint() * dg - df.adjoint() * g;
}

CMatrix wronskian(const JostData& j, int node) {
  const auto k = static_cast<std::size_t>(node);
  return wronskian(j.f_plus[k], j.df_plus[k], j.f_minus[k], j.df_minus[k]);
}

double wronskian_constancy(const JostData& j) {
  double worst = 0.0;
  for (int k = 0; k < j.grid.points(); ++k) worst = std::max(worst, rel_diff(wronskian(j, k), j.w_ref));
  return worst;
}

ScatteringCoefficients scattering_coefficients(const JostData& j) {
  for (const auto* m : {&j.coeffs.a, &j.coeffs.c}) {
    const double cond = condition_number(*m);
    if (!(cond <= 1e12)) {
      std::ostringstream os;
      os << "transmission coefficient has condition number " << cond << " at z = " << j.z;
      throw Error(ErrorCode::UnexpectedBoundState, os.str());
    }
  }
  return j.coeffs;
}

B7Residuals check_b7(const JostData& j) {
  const CMatrix& w = j.w_ref;
  return {rel_diff(2.0 * j.kappa_plus.matrix() * j.coeffs.c, w),
          rel_diff(2.0 * j.coeffs.a.adjoint() * j.kappa_minus.matrix(), w)};
}

namespace {

ResolventDiagonal resolvent_diag_with(const JostData& j, const path::OperatorPath& p, int node,
                                      const CMatrix& w_inv) {
  const auto k = static_cast<std::size_t>(node);
  const CMatrix a = p.eval(j.grid.node(node)).matrix();
  const CMatrix& fp = j.f_plus[k];
  const CMatrix& fm = j.f_minus[k];
  ResolventDiagonal out;
  out.r = fm * w_inv * fp.adjoint();
  out.r_tilde = (1.0 / j.z) * (j.df_minus[k] + a * fm) * w_inv * (j.df_plus[k] + a * fp).adjoint();
  return out;
}

}  // namespace

ResolventDiagonal resolvent_diag(const JostData& j, const path::OperatorPath& p, int node) {
  if (node < 0 || node >= j.grid.points()) throw Error(ErrorCode::InvalidArgument, "node outside the grid");
  return resolvent_diag_with(j, p, node, inverse_checked(j.w_ref, "Wronskian"));
}

Complex callias_lhs_boundary(const JostData& j, const path::OperatorPath& p, double r_eval) {
  if (r_eval + 1e-9 < p.support_radius() || r_eval > j.grid.half_width() + 1e-9)
    throw Error(ErrorCode::InvalidArgument, "boundary radius must lie in [T0, T]");
  const int mid = j.grid.mid();
  const int k_hi = std::min(j.grid.points() - 1, mid + static_cast<int>(std::lround(r_eval / j.grid.spacing())));
  const int k_lo = 2 * mid - k_hi;
  const CMatrix w_adj_inv = inverse_checked(j.w_ref.adjoint(), "Wronskian");
  auto term = [&](int node) {
    const auto k = static_cast<std::size_t>(node);
    const CMatrix a = p.eval(j.grid.node(node)).matrix();
    return (w_adj_inv * j.f_minus[k].adjoint() * (j.df_plus[k] + a * j.f_plus[k])).trace();
  };
  return (term(k_hi) - term(k_lo)) / j.z;
}

Complex callias_lhs_quadrature(const JostData& j, const path::OperatorPath& p) {
  const int n = j.grid.points();
  const CMatrix w_inv = inverse_checked(j.w_ref, "Wronskian");
  Complex sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = (k == 0 || k == n - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const auto rd = resolvent_diag_with(j, p, k, w_inv);
    sum += w * (rd.r_tilde - rd.r).trace();
  }
  return sum * (j.grid.spacing() / 3.0);
}

CalliasRhs callias_rhs(const HermitianMatrix& a_plus, const HermitianMatrix& a_minus, double z) {
  if (!(z < 0.0)) throw Error(ErrorCode::InvalidArgument, "Callias right-hand side is evaluated for real z < 0");
  if (a_plus.dim() != a_minus.dim()) throw Error(ErrorCode::DimensionMismatch, "endpoint dimensions differ");
  const Complex g = (herm::g_z(a_plus, z) - herm::g_z(a_minus, z)).trace() / (2.0 * z);
  const CMatrix kp_inv_a = herm::kappa(a_plus, z).matrix().partialPivLu().solve(a_plus.matrix());
  const CMatrix km_inv_a = herm::kappa(a_minus, z).matrix().partialPivLu().solve(a_minus.matrix());
  const double kform = (kp_inv_a - km_inv_a).trace().real() / (2.0 * z);
  return {g.real(), kform, g.imag()};
}

void write_diagnostics_csv(std::ostream& os, const JostData& j, const path::OperatorPath& p, int stride) {
  os << "t,tr_R,tr_R_tilde,wronskian_dev\n";
  const int n = j.grid.points();
  const CMatrix w_inv = inverse_checked(j.w_ref, "Wronskian");
  for (int k = 0; k < n; k += std::max(1, stride)) {
    const auto rd = resolvent_diag_with(j, p, k, w_inv);
    os << fmt_double(j.grid.node(k)) << ',' << fmt_double(rd.r.trace().real()) << ','
       << fmt_double(rd.r_tilde.trace().real()) << ',' << fmt_double((wronskian(j, k) - j.w_ref).norm()) << '\n';
  }
}

}  // namespace specflow::jost
