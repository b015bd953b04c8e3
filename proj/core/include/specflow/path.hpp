#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "specflow/herm.hpp"

namespace specflow::path {

using herm::HermitianMatrix;

enum class ProfileKind { TanhSigmoid, SmoothstepCompact, LinearRamp };

std::string_view to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(std::string_view name);

/// Which one-sided limit to take when t sits on a derivative discontinuity.
enum class Side { Left, Right };

/// Monotone scalar switch from 0 (t -> -inf) to 1 (t -> +inf) with a
/// closed-form derivative. Optionally truncated: frozen to 0 / 1 beyond
/// -(n+1) / n+1 and linearly interpolated on [-n-1,-n] and [n,n+1].
class Profile {
 public:
  Profile(ProfileKind kind, double center, double width);

  ProfileKind kind() const { return kind_; }
  double center() const { return center_; }
  double width() const { return width_; }
  const std::vector<double>& truncations() const { return truncations_; }

  double value(double t) const;
  double derivative(double t, Side side = Side::Right) const;

  /// Zero derivative outside a bounded interval, exactly.
  bool exactly_compact() const;

  /// Radius beyond which the derivative vanishes (compact) or drops below
  /// `deriv_floor` (tanh tails).
  double support_radius(double deriv_floor = 1e-14) const;

  /// Points where the derivative is discontinuous or not smooth, sorted.
  std::vector<double> breakpoints() const;

  Profile truncated(double n) const;

  /// psi(t) = 1 - phi(-t), which is again a profile.
  Profile reflected() const;

 private:
  double base_value(double t) const;
  double base_derivative(double t, Side side) const;
  double value_at_level(double t, std::size_t level) const;
  double derivative_at_level(double t, Side side, std::size_t level) const;

  ProfileKind kind_;
  double center_;
  double width_;
  std::vector<double> truncations_;  // applied in order
};

struct PathTerm {
  Profile profile;
  HermitianMatrix coefficient;
};

/// A(t) = A_minus + sum_i phi_i(t) C_i.
class OperatorPath {
 public:
  explicit OperatorPath(HermitianMatrix a_minus, std::vector<PathTerm> terms = {});

  Eigen::Index dim() const { return a_minus_.dim(); }
  const HermitianMatrix& a_minus() const { return a_minus_; }
  const std::vector<PathTerm>& terms() const { return terms_; }

  HermitianMatrix eval(double t) const;
  HermitianMatrix deriv(double t, Side side = Side::Right) const;

  /// Evaluates A'(t) on the piece containing the open interval around t
  /// in the direction of `toward`; used by integrators that sub-step at kinks.
  HermitianMatrix deriv_toward(double t, double toward) const;

  /// (A_minus, A_plus).
  std::pair<HermitianMatrix, HermitianMatrix> endpoints() const;
  HermitianMatrix a_plus() const { return endpoints().second; }

  /// (Q, Q~) = (A^2 - A', A^2 + A').
  std::pair<HermitianMatrix, HermitianMatrix> potentials(double t, Side side = Side::Right) const;

  double support_radius() const;
  bool exactly_compact() const;
  std::vector<double> breakpoints() const;

  OperatorPath truncate(double n) const;
  OperatorPath compress(const CMatrix& projection) const;

  /// t -> A(-t).
  OperatorPath reversed() const;

 private:
  HermitianMatrix a_minus_;
  std::vector<PathTerm> terms_;
};

/// Integral of ||A'(t)||_{S1} by adaptive Simpson (absolute tolerance 1e-10),
/// split at breakpoints.
double total_variation(const OperatorPath& p);

/// min mu^2 over the spectra of A_minus and A_plus. Throws
/// NotInvertibleAtInfinity when 0 is within 1e-10 of either spectrum.
double gap_bound(const OperatorPath& p);

}  // namespace specflow::path
