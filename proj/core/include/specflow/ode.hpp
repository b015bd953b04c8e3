#pragma once

#include <functional>
#include <span>

#include "specflow/herm.hpp"

namespace specflow::ode {

/// Generator G of a linear system Y' = G(t) Y. The second argument is a
/// point strictly inside the current sub-step, so piecewise-defined
/// coefficients can be evaluated on the correct side of a kink.
using Generator = std::function<CMatrix(double t, double inside)>;

/// One classical RK4 step from a to b (either direction). The step is split
/// at every breakpoint lying strictly inside (a, b), so coefficients that are
/// only piecewise smooth keep fourth-order accuracy.
CMatrix rk4_step(const Generator& g, const CMatrix& y, double a, double b, std::span<const double> breakpoints);

}  // namespace specflow::ode
