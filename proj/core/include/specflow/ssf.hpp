#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "specflow/herm.hpp"

namespace specflow::ssf {

using herm::HermitianMatrix;

/// Piecewise-constant function in canonical form: breakpoints strictly
/// increasing (separation > 1e-12) and adjacent values distinct.
/// values[k] is the value on (b_k, b_{k+1}); values.front() lies left of
/// b_1 and values.back() right of b_m.
class StepFunction {
 public:
  StepFunction() : values_{0.0} {}
  StepFunction(std::vector<double> breakpoints, std::vector<double> values);

  /// Builds a step function from jumps at (possibly unsorted, possibly
  /// coincident) points, starting from `left_value`.
  static StepFunction from_jumps(std::vector<std::pair<double, double>> jumps, double left_value = 0.0);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

  /// Integral over R; infinite unless both tails are zero.
  double integral() const;

  bool operator==(const StepFunction&) const = default;

 private:
  void canonicalize();
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

inline constexpr double kBreakpointTol = 1e-12;

/// xi(lambda; A+, A-) = N_{A-}(-inf, lambda) - N_{A+}(-inf, lambda).
StepFunction ssf_pair(const HermitianMatrix& a_plus, const HermitianMatrix& a_minus);
StepFunction ssf_from_spectra(const RVector& eig_plus, const RVector& eig_minus);

/// Value on the open interval containing `lambda`; AmbiguousAtBreakpoint
/// within 1e-12 of a breakpoint.
double eval_ssf(const StepFunction& xi, double lambda);

struct TraceFormulaCheck {
  double lhs;             // tr(f(A+) - f(A-))
  double rhs;             // sum_k v_k (f(b_{k+1}) - f(b_k))
  double residual;        // |lhs - rhs|
  double rhs_quadrature;  // integral of xi f' by adaptive Simpson, for reference
};

TraceFormulaCheck verify_trace_formula(const HermitianMatrix& a_plus, const HermitianMatrix& a_minus,
                                       const std::function<double(double)>& f,
                                       const std::function<double(double)>& f_prime);

/// (1/pi) * integral_{-sqrt(l)}^{sqrt(l)} eta(s) / sqrt(l - s^2) ds in closed form.
double abel_transform(const StepFunction& eta, double lambda);

/// CSV rows: breakpoint,value_left,value_right (header included).
void write_csv(std::ostream& os, const StepFunction& xi);

}  // namespace specflow::ssf
