#include "specflow/herm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "specflow/error.hpp"
#include "specflow/random.hpp"

namespace specflow::herm {

namespace {

bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

// 2x2 unitary that diagonalizes [[app, apq], [conj(apq), aqq]] under G* X G.
// Stored as its four entries; gpp is real, gpq real.
struct Rotation {
  double c;
  double s;
  Complex phase_conj;  // conj(apq / |apq|)
};

Rotation jacobi_rotation(double app, double aqq, Complex apq) {
  const double r = std::abs(apq);
  const Complex phase_conj = std::conj(apq / r);
  const double theta = (aqq - app) / (2.0 * r);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  return {c, t * c, phase_conj};
}

// X <- X G on columns p, q.
void rotate_columns(CMatrix& x, Eigen::Index p, Eigen::Index q, const Rotation& g) {
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    const Complex xp = x(k, p);
    const Complex xq = x(k, q);
    x(k, p) = g.c * xp - g.s * g.phase_conj * xq;
    x(k, q) = g.s * xp + g.c * g.phase_conj * xq;
  }
}

// X <- G* X on rows p, q.
void rotate_rows(CMatrix& x, Eigen::Index p, Eigen::Index q, const Rotation& g) {
  const Complex phase = std::conj(g.phase_conj);
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const Complex xp = x(p, k);
    const Complex xq = x(q, k);
    x(p, k) = g.c * xp - g.s * phase * xq;
    x(q, k) = g.s * xp + g.c * phase * xq;
  }
}

double off_diagonal_norm2(const CMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return s;
}

}  // namespace

double max_abs(const CMatrix& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, std::abs(m(i, j)));
  return best;
}

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "Hermitian matrix must be square");
  if (!all_finite(m)) throw Error(ErrorCode::NonFiniteValue, "matrix has non-finite entries");
  const double scale = std::max(1.0, max_abs(m));
  const double dev = max_abs(m - m.adjoint());
  if (dev > 1e-12 * scale) {
    std::ostringstream os;
    os << "||M - M*||_max = " << dev << " exceeds 1e-12 * " << scale;
    throw Error(ErrorCode::NotHermitian, os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) { return {CMatrix::Zero(dim, dim), Trusted{}}; }

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return {CMatrix::Identity(dim, dim), Trusted{}};
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw Error(ErrorCode::NonFiniteValue, "non-finite diagonal entry");
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
  }
  return {std::move(m), Trusted{}};
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw Error(ErrorCode::DimensionMismatch, "sum of matrices of different size");
  return {m_ + o.m_, Trusted{}};
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw Error(ErrorCode::DimensionMismatch, "difference of matrices of different size");
  return {m_ - o.m_, Trusted{}};
}

HermitianMatrix HermitianMatrix::operator-() const { return {-m_, Trusted{}}; }

HermitianMatrix HermitianMatrix::operator*(double s) const { return {s * m_, Trusted{}}; }

HermitianMatrix HermitianMatrix::conjugated(const CMatrix& v) const {
  if (v.cols() != dim()) throw Error(ErrorCode::DimensionMismatch, "conjugation by matrix of wrong size");
  CMatrix r = v * m_ * v.adjoint();
  return {0.5 * (r + r.adjoint()), Trusted{}};
}

EigenDecomposition eig(const HermitianMatrix& m) {
  const Eigen::Index n = m.dim();
  CMatrix a = m.matrix();
  CMatrix v = CMatrix::Identity(n, n);

  const double total = a.squaredNorm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double off = off_diagonal_norm2(a);
    if (off == 0.0 || off <= 1e-34 * total) break;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const Rotation g = jacobi_rotation(a(p, p).real(), a(q, q).real(), apq);
        rotate_columns(a, p, q, g);
        rotate_rows(a, p, q, g);
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        rotate_columns(v, p, q, g);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

RVector eigenvalues(const HermitianMatrix& m) { return eig(m).values; }

CMatrix apply_function(const EigenDecomposition& ed, const std::function<Complex(double)>& f) {
  const Eigen::Index n = ed.values.size();
  Eigen::VectorXcd fv(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    fv(k) = f(ed.values(k));
    if (!std::isfinite(fv(k).real()) || !std::isfinite(fv(k).imag())) {
      std::ostringstream os;
      os << "function is not finite at eigenvalue " << ed.values(k);
      throw Error(ErrorCode::NonFiniteValue, os.str());
    }
  }
  return ed.vectors * fv.asDiagonal() * ed.vectors.adjoint();
}

CMatrix apply_function(const HermitianMatrix& m, const std::function<Complex(double)>& f) {
  return apply_function(eig(m), f);
}

HermitianMatrix apply_real_function(const EigenDecomposition& ed, const std::function<double(double)>& f) {
  return HermitianMatrix(apply_function(ed, [&](double s) { return Complex(f(s), 0.0); }));
}

HermitianMatrix apply_real_function(const HermitianMatrix& m, const std::function<double(double)>& f) {
  return apply_real_function(eig(m), f);
}

CMatrix g_z(const HermitianMatrix& m, Complex z) {
  if (z.imag() == 0.0 && z.real() >= 0.0)
    throw Error(ErrorCode::InvalidArgument, "g_z requires z off [0, inf)");
  return apply_function(m, [z](double s) { return s / std::sqrt(Complex(s * s, 0.0) - z); });
}

HermitianMatrix kappa(const HermitianMatrix& m, double z) {
  if (!(z < 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa requires real z < 0");
  return apply_real_function(m, [z](double s) { return std::sqrt(s * s - z); });
}

RVector singular_values(const CMatrix& m) {
  // One-sided (Hestenes) Jacobi on the wider orientation.
  CMatrix w = m.rows() >= m.cols() ? CMatrix(m) : CMatrix(m.adjoint());
  const Eigen::Index n = w.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double alpha = w.col(i).squaredNorm();
        const double beta = w.col(j).squaredNorm();
        const Complex gamma = w.col(i).dot(w.col(j));  // w_i^* w_j
        if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || std::abs(gamma) < 1e-300) continue;
        rotated = true;
        rotate_columns(w, i, j, jacobi_rotation(alpha, beta, gamma));
      }
    }
    if (!rotated) break;
  }
  RVector s(n);
  for (Eigen::Index k = 0; k < n; ++k) s(k) = w.col(k).norm();
  std::sort(s.data(), s.data() + n, std::greater<>());
  return s;
}

double trace_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m).sum();
}

int count_below(std::span<const double> sorted, double level) {
  int count = 0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    if (j > 0 && sorted[j] < sorted[j - 1])
      throw Error(ErrorCode::InvalidArgument, "eigenvalues must be sorted ascending");
    if (std::abs(sorted[j] - level) <= kOnEigenvalueTol) {
      std::ostringstream os;
      os << "level " << level << " is within 1e-10 of eigenvalue " << sorted[j];
      throw Error(ErrorCode::OnEigenvalue, os.str());
    }
    if (sorted[j] < level) ++count;
  }
  return count;
}

int count_below(const RVector& sorted, double level) {
  return count_below(std::span<const double>(sorted.data(), static_cast<std::size_t>(sorted.size())), level);
}

HermitianMatrix projector(const CMatrix& q) { return HermitianMatrix(q * q.adjoint()); }

bool is_projection(const CMatrix& p, double tol) {
  if (p.rows() != p.cols()) return false;
  return max_abs(p - p.adjoint()) <= tol && max_abs(p * p - p) <= tol;
}

HermitianMatrix random_hermitian(Eigen::Index dim, std::uint64_t seed, double scale) {
  SplitMix64 rng(seed);
  CMatrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  return HermitianMatrix(0.5 * scale * (g + g.adjoint()));
}

CMatrix random_unitary(Eigen::Index dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  CMatrix q(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) q(i, j) = Complex(rng.normal(), rng.normal());
  // Modified Gram-Schmidt, twice for orthogonality to working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      q.col(j) /= q.col(j).norm();
    }
  }
  return q;
}

}  // namespace specflow::herm
