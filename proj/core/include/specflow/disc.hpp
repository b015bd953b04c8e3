#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "specflow/jost.hpp"
#include "specflow/path.hpp"

namespace specflow::disc {

using jost::GridSpec;

/// -u'' + V(t) u on the grid nodes with zero Dirichlet ghost values at
/// t_{-1} and t_N: diagonal blocks 2/h^2 + V(t_k), off-diagonal blocks
/// -1/h^2 I. Stored block-tridiagonally; eigenvalue questions are answered
/// through Sylvester inertia of block LDL* factorizations.
class BlockTridiagonal {
 public:
  BlockTridiagonal(std::vector<CMatrix> diagonal_blocks, double off_diagonal);

  int blocks() const { return static_cast<int>(diag_.size()); }
  Eigen::Index block_dim() const { return diag_.empty() ? 0 : diag_.front().rows(); }
  Eigen::Index size() const { return blocks() * block_dim(); }
  const std::vector<CMatrix>& diagonal_blocks() const { return diag_; }
  double off_diagonal() const { return off_; }

  /// Number of eigenvalues strictly below `level`.
  int count_below(double level) const;

  /// k-th smallest eigenvalue (0-based) by bisection to absolute `tol`.
  double kth_eigenvalue(int k, double tol = 1e-13) const;

  /// All eigenvalues in [lo, hi), ascending.
  std::vector<double> eigenvalues_in(double lo, double hi, double tol = 1e-13) const;

  /// tr((M - z)^{-1}) for z below the spectrum, from the diagonal blocks of
  /// the inverse (forward and backward Schur complements).
  double resolvent_trace(double z) const;

  /// Gershgorin enclosure of the spectrum.
  std::pair<double, double> spectral_bounds() const;

  /// Dense copy (small grids and tests only).
  CMatrix dense() const;

 private:
  std::vector<CMatrix> diag_;
  double off_;
};

struct DiscretizedPair {
  GridSpec grid{1.0, 3};
  BlockTridiagonal h;
  BlockTridiagonal h_tilde;
  std::optional<double> gap;  // gap_bound of the path, when the endpoints are invertible
  double scale = 1.0;         // max |Q|, |Q~| entry, for relative thresholds
};

inline constexpr long kDefaultSizeCap = 200000;

DiscretizedPair build_discretized(const path::OperatorPath& p, const GridSpec& grid, long size_cap = kDefaultSizeCap);

struct Margins {
  std::optional<double> below;  // largest eigenvalue below the threshold
  double above;                 // smallest eigenvalue at or above it
};

struct KernelDims {
  int n_h = 0;
  int n_h_tilde = 0;
  Margins margins_h;
  Margins margins_h_tilde;
};

/// Eigenvalue counts below `threshold`, after checking that the threshold
/// sits in a genuine gap (NoSpectralGapAtThreshold otherwise).
KernelDims kernel_dims(const DiscretizedPair& d, double threshold);

/// dim ker H - dim ker H~ on the grid, with threshold a/10 when
/// `threshold` is not given.
int fredholm_index(const path::OperatorPath& p, const GridSpec& grid, std::optional<double> threshold = {});

/// N_H(-inf, lambda) - N_H~(-inf, lambda) for 0 < lambda < a. Throws
/// UnstableLevel when an eigenvalue of either operator lies within 1e-3
/// relative of lambda.
int ssf_discrete(const DiscretizedPair& d, double lambda);

struct ResolventTraceDiff {
  double value;  // tr((H~ - z)^{-1} - (H - z)^{-1})
};
ResolventTraceDiff resolvent_trace_diff(const DiscretizedPair& d, double z);

struct ShootingKernel {
  int dim_ker = 0;      // dim ker D_A,  D_A = d/dt + A
  int dim_coker = 0;    // dim ker D_A*
  std::vector<double> cosines_ker;
  std::vector<double> cosines_coker;
  int index() const { return dim_ker - dim_coker; }
};

/// Independent kernel oracle: propagates the decaying subspaces of the
/// first-order system u' = -A u (and u' = A u for the adjoint) across the
/// compact support and counts principal angles with cos >= 1 - eps_svd.
ShootingKernel kernel_via_shooting(const path::OperatorPath& p, double eps_svd = 1e-8, double step = 1e-3);

/// CSV rows: index,eig_H,eig_H_tilde for eigenvalues below `limit`.
void write_gap_eigenvalues_csv(std::ostream& os, const DiscretizedPair& d, double limit);

}  // namespace specflow::disc
