#include "specflow/disc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specflow/csv.hpp"
#include "specflow/error.hpp"
#include "specflow/ode.hpp"

namespace specflow::disc {

namespace {

// Inverse of a small Hermitian block plus its count of negative eigenvalues.
// Exactly singular directions are nudged to +tiny; this only moves the
// shift off a measure-zero set and leaves the inertia count consistent.
struct BlockInverse {
  CMatrix inverse;
  int negatives;
};

BlockInverse invert_hermitian(const CMatrix& s) {
  const herm::EigenDecomposition ed = herm::eig(herm::HermitianMatrix(s));
  const double scale = std::max(1.0, ed.values.cwiseAbs().maxCoeff());
  const double tiny = 1e-300 + std::numeric_limits<double>::epsilon() * scale * 1e-3;
  int neg = 0;
  RVector inv(ed.values.size());
  for (Eigen::Index k = 0; k < ed.values.size(); ++k) {
    double mu = ed.values(k);
    if (std::abs(mu) < tiny) mu = tiny;
    if (mu < 0.0) ++neg;
    inv(k) = 1.0 / mu;
  }
  return {ed.vectors * inv.asDiagonal() * ed.vectors.adjoint(), neg};
}

CMatrix invert_pd(const CMatrix& s) {
  Eigen::LLT<CMatrix> llt(s);
  if (llt.info() == Eigen::Success) return llt.solve(CMatrix::Identity(s.rows(), s.cols()));
  return s.partialPivLu().inverse();
}

int count_below_threshold(const BlockTridiagonal& m, double level) { return m.count_below(level); }

}  // namespace

BlockTridiagonal::BlockTridiagonal(std::vector<CMatrix> diagonal_blocks, double off_diagonal)
    : diag_(std::move(diagonal_blocks)), off_(off_diagonal) {
  if (diag_.empty()) throw Error(ErrorCode::InvalidArgument, "block tridiagonal matrix needs at least one block");
  for (const auto& b : diag_) {
    if (b.rows() != diag_.front().rows() || b.cols() != b.rows())
      throw Error(ErrorCode::DimensionMismatch, "diagonal blocks must be square and of equal size");
    if (herm::max_abs(b - b.adjoint()) > 1e-10 * std::max(1.0, herm::max_abs(b)))
      throw Error(ErrorCode::NotHermitian, "diagonal block is not Hermitian");
  }
}

int BlockTridiagonal::count_below(double level) const {
  const Eigen::Index d = block_dim();
  const double off2 = off_ * off_;
  int negatives = 0;
  if (d == 1) {
    double s = 0.0;
    for (std::size_t k = 0; k < diag_.size(); ++k) {
      s = diag_[k](0, 0).real() - level - (k == 0 ? 0.0 : off2 / s);
      if (s == 0.0) s = std::numeric_limits<double>::epsilon() * (std::abs(level) + 1.0) * 1e-3;
      if (s < 0.0) ++negatives;
    }
    return negatives;
  }
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix prev_inv;
  for (std::size_t k = 0; k < diag_.size(); ++k) {
    CMatrix s = diag_[k] - level * id;
    if (k > 0) s -= off2 * prev_inv;
    const BlockInverse bi = invert_hermitian(0.5 * (s + s.adjoint()));
    negatives += bi.negatives;
    prev_inv = bi.inverse;
  }
  return negatives;
}

std::pair<double, double> BlockTridiagonal::spectral_bounds() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const Eigen::Index d = block_dim();
  for (std::size_t k = 0; k < diag_.size(); ++k) {
    const double neighbours = (k == 0 || k + 1 == diag_.size() ? 1.0 : 2.0) * std::abs(off_);
    for (Eigen::Index i = 0; i < d; ++i) {
      double radius = neighbours;
      for (Eigen::Index j = 0; j < d; ++j)
        if (j != i) radius += std::abs(diag_[k](i, j));
      lo = std::min(lo, diag_[k](i, i).real() - radius);
      hi = std::max(hi, diag_[k](i, i).real() + radius);
    }
  }
  return {lo, hi};
}

double BlockTridiagonal::kth_eigenvalue(int k, double tol) const {
  if (k < 0 || k >= size()) throw Error(ErrorCode::InvalidArgument, "eigenvalue index out of range");
  auto [lo, hi] = spectral_bounds();
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> BlockTridiagonal::eigenvalues_in(double lo, double hi, double tol) const {
  const int n_lo = count_below(lo);
  const int n_hi = count_below(hi);
  std::vector<double> out;
  for (int k = n_lo; k < n_hi; ++k) out.push_back(kth_eigenvalue(k, tol));
  return out;
}

double BlockTridiagonal::resolvent_trace(double z) const {
  const std::size_t n = diag_.size();
  const Eigen::Index d = block_dim();
  const CMatrix id = CMatrix::Identity(d, d);
  const double off2 = off_ * off_;
  std::vector<CMatrix> left_inv(n), right_inv(n);
  for (std::size_t k = 0; k < n; ++k) {
    CMatrix s = diag_[k] - z * id;
    if (k > 0) s -= off2 * left_inv[k - 1];
    left_inv[k] = invert_pd(s);
  }
  for (std::size_t k = n; k-- > 0;) {
    CMatrix s = diag_[k] - z * id;
    if (k + 1 < n) s -= off2 * right_inv[k + 1];
    right_inv[k] = invert_pd(s);
  }
  double trace = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    CMatrix s = diag_[k] - z * id;
    if (k > 0) s -= off2 * left_inv[k - 1];
    if (k + 1 < n) s -= off2 * right_inv[k + 1];
    trace += invert_pd(s).trace().real();
  }
  return trace;
}

CMatrix BlockTridiagonal::dense() const {
  const Eigen::Index d = block_dim();
  CMatrix m = CMatrix::Zero(size(), size());
  for (int k = 0; k < blocks(); ++k) {
    m.block(k * d, k * d, d, d) = diag_[static_cast<std::size_t>(k)];
    if (k + 1 < blocks()) {
      m.block(k * d, (k + 1) * d, d, d) = off_ * CMatrix::Identity(d, d);
      m.block((k + 1) * d, k * d, d, d) = off_ * CMatrix::Identity(d, d);
    }
  }
  return m;
}

DiscretizedPair build_discretized(const path::OperatorPath& p, const GridSpec& grid, long size_cap) {
  const long total = static_cast<long>(grid.points()) * static_cast<long>(p.dim());
  if (total > size_cap) {
    std::ostringstream os;
    os << "N*d = " << total << " exceeds the configured cap " << size_cap;
    throw Error(ErrorCode::CapExceeded, os.str());
  }
  if (p.exactly_compact() && p.support_radius() > grid.half_width() + 1e-12)
    throw Error(ErrorCode::InvalidArgument, "grid half width is smaller than the path support radius");

  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const Eigen::Index d = p.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  std::vector<CMatrix> dh, dht;
  dh.reserve(static_cast<std::size_t>(grid.points()));
  dht.reserve(static_cast<std::size_t>(grid.points()));
  double scale = 0.0;
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.node(k);
    const CMatrix a = p.eval(t).matrix();
    // Average of the one-sided derivatives: exact away from kinks.
    const CMatrix da = 0.5 * (p.deriv(t, path::Side::Left).matrix() + p.deriv(t, path::Side::Right).matrix());
    const CMatrix a2 = a * a;
    dh.push_back(2.0 * inv_h2 * id + a2 - da);
    dht.push_back(2.0 * inv_h2 * id + a2 + da);
    scale = std::max({scale, herm::max_abs(a2 - da), herm::max_abs(a2 + da)});
  }

  DiscretizedPair out{grid, BlockTridiagonal(std::move(dh), -inv_h2), BlockTridiagonal(std::move(dht), -inv_h2),
                      std::nullopt, std::max(scale, 1e-300)};
  try {
    out.gap = path::gap_bound(p);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotInvertibleAtInfinity) throw;
  }
  return out;
}

namespace {

Margins margins_of(const BlockTridiagonal& m, int n_below) {
  Margins mg;
  if (n_below > 0) mg.below = m.kth_eigenvalue(n_below - 1);
  mg.above = n_below < m.size() ? m.kth_eigenvalue(n_below) : std::numeric_limits<double>::infinity();
  return mg;
}

void check_gap(const Margins& mg, double threshold, const char* which) {
  const double lower = mg.below ? std::abs(*mg.below) : 0.0;
  const bool ok = mg.above >= threshold && (!mg.below || mg.above >= 10.0 * lower);
  if (!ok) {
    std::ostringstream os;
    os << which << ": eigenvalues " << (mg.below ? *mg.below : 0.0) << " and " << mg.above
       << " around threshold " << threshold << " are not separated by a factor of 10";
    throw Error(ErrorCode::NoSpectralGapAtThreshold, os.str());
  }
}

}  // namespace

KernelDims kernel_dims(const DiscretizedPair& d, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel threshold must be positive");
  KernelDims kd;
  kd.n_h = count_below_threshold(d.h, threshold);
  kd.n_h_tilde = count_below_threshold(d.h_tilde, threshold);
  kd.margins_h = margins_of(d.h, kd.n_h);
  kd.margins_h_tilde = margins_of(d.h_tilde, kd.n_h_tilde);
  check_gap(kd.margins_h, threshold, "H");
  check_gap(kd.margins_h_tilde, threshold, "H~");
  return kd;
}

int fredholm_index(const path::OperatorPath& p, const GridSpec& grid, std::optional<double> threshold) {
  const double a = path::gap_bound(p);
  const DiscretizedPair d = build_discretized(p, grid);
  const KernelDims kd = kernel_dims(d, threshold.value_or(a / 10.0));
  return kd.n_h - kd.n_h_tilde;
}

int ssf_discrete(const DiscretizedPair& d, double lambda) {
  if (!d.gap) throw Error(ErrorCode::NotInvertibleAtInfinity, "discrete SSF needs invertible endpoints");
  if (!(lambda > 0.0 && lambda < *d.gap)) {
    std::ostringstream os;
    os << "lambda = " << lambda << " must lie in (0, a) with a = " << *d.gap;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  int result = 0;
  for (const auto& [m, sign] : {std::pair{&d.h, 1}, std::pair{&d.h_tilde, -1}}) {
    const int c = m->count_below(lambda);
    if (m->count_below(lambda * (1.0 - 1e-3)) != c || m->count_below(lambda * (1.0 + 1e-3)) != c) {
      std::ostringstream os;
      os << "an eigenvalue lies within relative 1e-3 of lambda = " << lambda;
      throw Error(ErrorCode::UnstableLevel, os.str());
    }
    result += sign * c;
  }
  return result;
}

ResolventTraceDiff resolvent_trace_diff(const DiscretizedPair& d, double z) {
  if (!(z < 0.0)) throw Error(ErrorCode::InvalidArgument, "resolvent trace difference is taken at real z < 0");
  return {d.h_tilde.resolvent_trace(z) - d.h.resolvent_trace(z)};
}

namespace {

CMatrix orthonormalize(const CMatrix& y) {
  Eigen::HouseholderQR<CMatrix> qr(y);
  return qr.householderQ() * CMatrix::Identity(y.rows(), y.cols());
}

CMatrix spectral_columns(const herm::EigenDecomposition& ed, bool positive) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < ed.values.size(); ++k)
    if ((ed.values(k) > 0.0) == positive) cols.push_back(k);
  CMatrix out(ed.vectors.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = ed.vectors.col(cols[k]);
  return out;
}

std::pair<int, std::vector<double>> intersection_dim(const path::OperatorPath& p, const CMatrix& start,
                                                     const CMatrix& target, double sign, double eps_svd,
                                                     double step) {
  if (start.cols() == 0 || target.cols() == 0) return {0, {}};
  const double r = p.support_radius();
  CMatrix y = start;
  if (r > 0.0) {
    const std::vector<double> bps = p.breakpoints();
    const ode::Generator gen = [&](double t, double) { return CMatrix(sign * p.eval(t).matrix()); };
    const int steps = std::max(1, static_cast<int>(std::ceil(2.0 * r / step)));
    for (int k = 0; k < steps; ++k) {
      const double a = -r + 2.0 * r * k / steps;
      const double b = k + 1 == steps ? r : -r + 2.0 * r * (k + 1) / steps;
      y = orthonormalize(ode::rk4_step(gen, y, a, b, bps));
    }
  }
  const RVector cos = herm::singular_values(y.adjoint() * target);
  std::vector<double> cosines(cos.data(), cos.data() + cos.size());
  int dim = 0;
  for (double c : cosines) {
    if (c > 1.0 - 1e-6 && c < 1.0 - 1e-10) {
      std::ostringstream os;
      os << "principal angle cosine " << c << " is too close to 1 to classify";
      throw Error(ErrorCode::IllConditionedIntersection, os.str());
    }
    if (c >= 1.0 - eps_svd) ++dim;
  }
  return {dim, cosines};
}

}  // namespace

ShootingKernel kernel_via_shooting(const path::OperatorPath& p, double eps_svd, double step) {
  path::gap_bound(p);
  if (!p.exactly_compact())
    throw Error(ErrorCode::TruncateFirst, "shooting works on exactly compact paths; truncate first");
  const auto [minus, plus] = p.endpoints();
  const herm::EigenDecomposition ed_minus = herm::eig(minus);
  const herm::EigenDecomposition ed_plus = herm::eig(plus);

  ShootingKernel out;
  // D_A u = u' + A u = 0: decays at -inf on the negative subspace of A-,
  // at +inf on the positive subspace of A+.
  std::tie(out.dim_ker, out.cosines_ker) = intersection_dim(
      p, spectral_columns(ed_minus, false), spectral_columns(ed_plus, true), -1.0, eps_svd, step);
  // D_A* u = -u' + A u = 0: the mirror image.
  std::tie(out.dim_coker, out.cosines_coker) = intersection_dim(
      p, spectral_columns(ed_minus, true), spectral_columns(ed_plus, false), +1.0, eps_svd, step);
  return out;
}

void write_gap_eigenvalues_csv(std::ostream& os, const DiscretizedPair& d, double limit) {
  const double lo = std::min(d.h.spectral_bounds().first, d.h_tilde.spectral_bounds().first) - 1.0;
  const std::vector<double> eh = d.h.eigenvalues_in(lo, limit);
  const std::vector<double> eht = d.h_tilde.eigenvalues_in(lo, limit);
  os << "index,eig_H,eig_H_tilde\n";
  for (std::size_t k = 0; k < std::max(eh.size(), eht.size()); ++k) {
    os << k << ',';
    if (k < eh.size()) os << fmt_double(eh[k]);
    os << ',';
    if (k < eht.size()) os << fmt_double(eht[k]);
    os << '\n';
  }
}

}  // namespace specflow::disc
