#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "specflow/ssf.hpp"

namespace testing {

/// (1/pi) * integral of eta(s) / sqrt(lambda - s^2) over (-sqrt(lambda), sqrt(lambda))
/// by tanh-sinh quadrature on each step interval. The endpoint distances
/// supplied by the quadrature keep the singular factor accurate.
inline double abel_quadrature(const specflow::ssf::StepFunction& eta, double lambda) {
  const double r = std::sqrt(lambda);
  std::vector<double> cuts{-r};
  for (double b : eta.breakpoints())
    if (b > -r && b < r) cuts.push_back(b);
  cuts.push_back(r);

  boost::math::quadrature::tanh_sinh<double> integrator;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double p = cuts[k], q = cuts[k + 1];
    const double v = specflow::ssf::eval_ssf(eta, 0.5 * (p + q));
    if (v == 0.0) continue;
    auto f = [&](double s, double sc) {
      // sc < 0: distance p - s from the left end; sc > 0: q - s.
      const double from_p = sc < 0.0 ? -sc : s - p;
      const double to_q = sc > 0.0 ? sc : q - s;
      const double r_minus_s = (q == r) ? to_q : r - s;
      const double r_plus_s = (p == -r) ? from_p : r + s;
      return 1.0 / std::sqrt(r_minus_s * r_plus_s);
    };
    total += v * integrator.integrate(f, p, q, 1e-14);
  }
  return total / std::numbers::pi;
}

}  // namespace testing
