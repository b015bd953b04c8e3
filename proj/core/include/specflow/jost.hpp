#pragma once

#include <ostream>
#include <vector>

#include "specflow/path.hpp"

namespace specflow::jost {

using herm::HermitianMatrix;

/// Uniform grid on [-T, T] with N (odd) nodes; node (N-1)/2 is exactly 0.
class GridSpec {
 public:
  GridSpec(double half_width, int points);

  /// Grid with spacing no larger than `h`.
  static GridSpec with_step(double half_width, double h);

  double half_width() const { return half_width_; }
  int points() const { return points_; }
  double spacing() const { return spacing_; }
  int mid() const { return (points_ - 1) / 2; }
  double node(int k) const;

 private:
  double half_width_;
  int points_;
  double spacing_;
};

struct ScatteringCoefficients {
  CMatrix a, b, c, d;
  /// Max relative error of re-synthesizing (F, F') at the extraction nodes.
  double reconstruction_residual = 0.0;
};

/// Jost solutions F_+ (decaying at +inf) and F_- (decaying at -inf) of
/// -F'' + Q F = z F on the grid, for one real z < 0.
struct JostData {
  double z = 0.0;
  GridSpec grid{1.0, 3};
  HermitianMatrix kappa_plus, kappa_minus;
  HermitianMatrix a_plus, a_minus;
  std::vector<CMatrix> f_plus, df_plus, f_minus, df_minus;  // per node
  ScatteringCoefficients coeffs;  // raw extraction, see scattering_coefficients()
  CMatrix w_ref;                  // W(F_+, F_-) at the t = 0 node
};

/// Largest admissible max(kappa) * 2T; beyond it e^{kappa T} approaches
/// the double overflow range.
inline constexpr double kMaxDynamicRange = 600.0;

/// Integrates F_+ backward from +T and F_- forward from -T with classical
/// RK4 (step = grid spacing, sub-stepped at kinks of the path). The path
/// must have exactly compact support inside [-T, T].
JostData solve_jost(const path::OperatorPath& p, double z, const GridSpec& grid);

/// W(F, G) = F* G' - F'* G.
CMatrix wronskian(const CMatrix& f, const CMatrix& df, const CMatrix& g, const CMatrix& dg);
CMatrix wronskian(const JostData& j, int node);

/// max_k ||W(t_k) - W(0)|| / ||W(0)||.
double wronskian_constancy(const JostData& j);

/// Validated coefficients: throws UnexpectedBoundState if a or c has
/// condition number above 1e12.
ScatteringCoefficients scattering_coefficients(const JostData& j);

struct B7Residuals {
  double via_c;  // ||W - 2 kappa_+ c|| / ||W||
  double via_a;  // ||W - 2 a* kappa_-|| / ||W||
};
B7Residuals check_b7(const JostData& j);

struct ResolventDiagonal {
  CMatrix r;        // (H - z)^{-1} kernel at (t, t)
  CMatrix r_tilde;  // (H~ - z)^{-1} kernel at (t, t)
};
ResolventDiagonal resolvent_diag(const JostData& j, const path::OperatorPath& p, int node);

/// (1/z) tr((W*)^{-1} F_-^* (F_+' + A F_+)) evaluated between -R and R.
/// R is snapped to the nearest grid node.
Complex callias_lhs_boundary(const JostData& j, const path::OperatorPath& p, double r_eval);

/// Composite Simpson of tr(R~(t,t) - R(t,t)) over the whole grid.
Complex callias_lhs_quadrature(const JostData& j, const path::OperatorPath& p);

struct CalliasRhs {
  double value;        // (1/2z) tr(g_z(A+) - g_z(A-))
  double kappa_form;   // (1/2z) tr(kappa_+^{-1} A+ - kappa_-^{-1} A-)
  double imag_part;    // imaginary part of the g_z form (0 for Hermitian input)
};
CalliasRhs callias_rhs(const HermitianMatrix& a_plus, const HermitianMatrix& a_minus, double z);

/// CSV rows: t,tr_R,tr_R_tilde,wronskian_dev (header included).
void write_diagnostics_csv(std::ostream& os, const JostData& j, const path::OperatorPath& p, int stride = 1);

}  // namespace specflow::jost
