#include "specflow/ode.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace specflow::ode {

namespace {

CMatrix rk4_substep(const Generator& g, const CMatrix& y, double a, double b) {
  const double h = b - a;
  const double inside = 0.5 * (a + b);
  const CMatrix k1 = g(a, inside) * y;
  const CMatrix k2 = g(inside, inside) * (y + 0.5 * h * k1);
  const CMatrix k3 = g(inside, inside) * (y + 0.5 * h * k2);
  const CMatrix k4 = g(b, inside) * (y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

CMatrix rk4_step(const Generator& g, const CMatrix& y, double a, double b, std::span<const double> breakpoints) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double snap = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  std::vector<double> cuts;
  for (double bp : breakpoints)
    if (bp > lo + snap && bp < hi - snap) cuts.push_back(bp);
  if (cuts.empty()) return rk4_substep(g, y, a, b);

  if (b < a) std::reverse(cuts.begin(), cuts.end());
  CMatrix state = y;
  double from = a;
  for (double c : cuts) {
    state = rk4_substep(g, state, from, c);
    from = c;
  }
  return rk4_substep(g, state, from, b);
}

}  // namespace specflow::ode
