#include "specflow/ssf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "specflow/csv.hpp"
#include "specflow/error.hpp"

namespace specflow::ssf {

namespace {

double simpson_recursive(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                         double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double flm = f(0.5 * (a + m));
  const double frm = f(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recursive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recursive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fm = f(0.5 * (a + b));
  const double fb = f(b);
  return simpson_recursive(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40);
}

}  // namespace

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.size() != breakpoints_.size() + 1)
    throw Error(ErrorCode::InvalidArgument, "step function needs one more value than breakpoints");
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    if (!std::isfinite(breakpoints_[k])) throw Error(ErrorCode::NonFiniteValue, "non-finite breakpoint");
    if (k > 0 && !(breakpoints_[k] - breakpoints_[k - 1] > kBreakpointTol))
      throw Error(ErrorCode::InvalidArgument, "breakpoints must increase with separation > 1e-12");
  }
  canonicalize();
}

void StepFunction::canonicalize() {
  std::vector<double> bps;
  std::vector<double> vals{values_.front()};
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    if (values_[k + 1] == vals.back()) continue;
    bps.push_back(breakpoints_[k]);
    vals.push_back(values_[k + 1]);
  }
  breakpoints_ = std::move(bps);
  values_ = std::move(vals);
}

StepFunction StepFunction::from_jumps(std::vector<std::pair<double, double>> jumps, double left_value) {
  std::sort(jumps.begin(), jumps.end());
  std::vector<double> bps;
  std::vector<double> vals{left_value};
  std::size_t i = 0;
  while (i < jumps.size()) {
    // Cluster points within 1e-12 of the cluster's first point.
    const double start = jumps[i].first;
    double sum_pos = 0.0;
    double jump = 0.0;
    std::size_t count = 0;
    while (i < jumps.size() && jumps[i].first - start <= kBreakpointTol) {
      sum_pos += jumps[i].first;
      jump += jumps[i].second;
      ++count;
      ++i;
    }
    if (jump == 0.0) continue;
    const double pos = sum_pos / static_cast<double>(count);
    if (!bps.empty() && !(pos - bps.back() > kBreakpointTol)) {
      vals.back() += jump;
      continue;
    }
    bps.push_back(pos);
    vals.push_back(vals.back() + jump);
  }
  return StepFunction(std::move(bps), std::move(vals));
}

double StepFunction::integral() const {
  if (values_.front() != 0.0 || values_.back() != 0.0) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t k = 1; k + 1 < values_.size(); ++k) s += values_[k] * (breakpoints_[k] - breakpoints_[k - 1]);
  return s;
}

StepFunction ssf_from_spectra(const RVector& eig_plus, const RVector& eig_minus) {
  if (eig_plus.size() != eig_minus.size())
    throw Error(ErrorCode::DimensionMismatch, "spectral shift needs pairs of equal dimension");
  std::vector<std::pair<double, double>> jumps;
  jumps.reserve(static_cast<std::size_t>(2 * eig_plus.size()));
  for (Eigen::Index k = 0; k < eig_minus.size(); ++k) jumps.emplace_back(eig_minus(k), +1.0);
  for (Eigen::Index k = 0; k < eig_plus.size(); ++k) jumps.emplace_back(eig_plus(k), -1.0);
  return StepFunction::from_jumps(std::move(jumps));
}

StepFunction ssf_pair(const HermitianMatrix& a_plus, const HermitianMatrix& a_minus) {
  if (a_plus.dim() != a_minus.dim())
    throw Error(ErrorCode::DimensionMismatch, "spectral shift needs pairs of equal dimension");
  return ssf_from_spectra(herm::eigenvalues(a_plus), herm::eigenvalues(a_minus));
}

double eval_ssf(const StepFunction& xi, double lambda) {
  const auto& bps = xi.breakpoints();
  for (double b : bps) {
    if (std::abs(lambda - b) <= kBreakpointTol) {
      std::ostringstream os;
      os << "lambda = " << lambda << " is a breakpoint of the step function";
      throw Error(ErrorCode::AmbiguousAtBreakpoint, os.str());
    }
  }
  const auto idx = std::upper_bound(bps.begin(), bps.end(), lambda) - bps.begin();
  return xi.values()[static_cast<std::size_t>(idx)];
}

TraceFormulaCheck verify_trace_formula(const HermitianMatrix& a_plus, const HermitianMatrix& a_minus,
                                       const std::function<double(double)>& f,
                                       const std::function<double(double)>& f_prime) {
  const RVector ep = herm::eigenvalues(a_plus);
  const RVector em = herm::eigenvalues(a_minus);
  const StepFunction xi = ssf_from_spectra(ep, em);

  double lhs = 0.0;
  for (Eigen::Index k = 0; k < ep.size(); ++k) lhs += f(ep(k)) - f(em(k));

  const auto& bps = xi.breakpoints();
  const auto& vals = xi.values();
  double rhs = 0.0;
  double rhs_quad = 0.0;
  for (std::size_t k = 1; k + 1 < vals.size(); ++k) {
    const double lo = bps[k - 1];
    const double hi = bps[k];
    rhs += vals[k] * (f(hi) - f(lo));
    rhs_quad += vals[k] * simpson(f_prime, lo, hi, 1e-13);
  }
  if (!std::isfinite(lhs) || !std::isfinite(rhs))
    throw Error(ErrorCode::NonFiniteValue, "test function not finite on the spectra");
  return {lhs, rhs, std::abs(lhs - rhs), rhs_quad};
}

double abel_transform(const StepFunction& eta, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "Abel transform needs lambda > 0");
  const double r = std::sqrt(lambda);
  const auto& bps = eta.breakpoints();
  const auto& vals = eta.values();
  double angle_sum = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const double p = k == 0 ? -r : std::max(bps[k - 1], -r);
    const double q = k + 1 == vals.size() ? r : std::min(bps[k], r);
    if (!(q > p) || vals[k] == 0.0) continue;
    const double hi = std::asin(std::clamp(q / r, -1.0, 1.0));
    const double lo = std::asin(std::clamp(p / r, -1.0, 1.0));
    angle_sum += vals[k] * (hi - lo);
  }
  return angle_sum / std::numbers::pi;
}

void write_csv(std::ostream& os, const StepFunction& xi) {
  os << "breakpoint,value_left,value_right\n";
  const auto& bps = xi.breakpoints();
  const auto& vals = xi.values();
  for (std::size_t k = 0; k < bps.size(); ++k)
    os << fmt_double(bps[k]) << ',' << fmt_double(vals[k]) << ',' << fmt_double(vals[k + 1]) << '\n';
}

}  // namespace specflow::ssf
