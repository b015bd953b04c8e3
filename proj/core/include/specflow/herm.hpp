#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace specflow {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

namespace herm {

/// Max-entry magnitude.
double max_abs(const CMatrix& m);

/// A finite, conjugate-symmetric square matrix. Construction checks
/// ||M - M*||_max <= 1e-12 * max(1, ||M||_max) and then stores the exactly
/// symmetrized (M + M*) / 2, so every downstream product sees a Hermitian value.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& m);

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix diagonal(std::span<const double> values);
  static HermitianMatrix scalar(double value) { return diagonal(std::span<const double>(&value, 1)); }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator-() const;
  HermitianMatrix operator*(double s) const;
  friend HermitianMatrix operator*(double s, const HermitianMatrix& h) { return h * s; }

  /// V M V* for any square V of matching size (the result is Hermitian).
  HermitianMatrix conjugated(const CMatrix& v) const;

 private:
  struct Trusted {};
  HermitianMatrix(CMatrix m, Trusted) : m_(std::move(m)) {}
  CMatrix m_;
};

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors, unitary
};

/// Cyclic Jacobi with a fixed row-major sweep order.
EigenDecomposition eig(const HermitianMatrix& m);

/// Eigenvalues only (same solver).
RVector eigenvalues(const HermitianMatrix& m);

/// U diag(f(lambda)) U*. Throws NonFiniteValue if f is not finite on the spectrum.
CMatrix apply_function(const HermitianMatrix& m, const std::function<Complex(double)>& f);
CMatrix apply_function(const EigenDecomposition& ed, const std::function<Complex(double)>& f);

/// Same as apply_function for real-valued f; the result is Hermitian.
HermitianMatrix apply_real_function(const HermitianMatrix& m, const std::function<double(double)>& f);
HermitianMatrix apply_real_function(const EigenDecomposition& ed, const std::function<double(double)>& f);

/// g_z(s) = s / sqrt(s^2 - z), principal branch; z must lie off [0, inf).
CMatrix g_z(const HermitianMatrix& m, Complex z);

/// kappa = sqrt(M^2 - z I) for real z < 0; positive definite.
HermitianMatrix kappa(const HermitianMatrix& m, double z);

/// Sum of singular values (one-sided Jacobi SVD).
double trace_norm(const CMatrix& m);

/// Singular values in descending order.
RVector singular_values(const CMatrix& m);

/// Tolerance used to decide that a level sits on an eigenvalue.
inline constexpr double kOnEigenvalueTol = 1e-10;

/// #{j : lambda_j < level}. Throws OnEigenvalue within 1e-10 of an eigenvalue.
int count_below(std::span<const double> sorted_eigenvalues, double level);
int count_below(const RVector& sorted_eigenvalues, double level);

/// Orthogonal projector onto the span of the given (orthonormal) columns.
HermitianMatrix projector(const CMatrix& orthonormal_columns);

/// True when P^2 = P = P* to `tol` in max-entry norm.
bool is_projection(const CMatrix& p, double tol = 1e-10);

// Seeded generators. Deterministic for a given seed on every platform that
// implements IEEE-754 double arithmetic.
HermitianMatrix random_hermitian(Eigen::Index dim, std::uint64_t seed, double scale = 1.0);
CMatrix random_unitary(Eigen::Index dim, std::uint64_t seed);

}  // namespace herm
}  // namespace specflow
