#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "specflow/path.hpp"

namespace specflow::flow {

struct CrossingEvent {
  double t_cross;       // bracket midpoint
  int direction;        // +1 rightwards, -1 leftwards
  int multiplicity;     // |jump of the counting function| across the bracket
  double bracket_width;
};

struct FlowResult {
  int flow = 0;
  std::vector<CrossingEvent> events;
};

/// Row k holds the ascending eigenvalues of A(t_k).
Eigen::MatrixXd eigenvalue_branches(const path::OperatorPath& p, std::span<const double> t_grid);

/// Uniform grid covering [-T0 - 1, T0 + 1] with at most `spacing` between nodes.
std::vector<double> default_flow_grid(const path::OperatorPath& p, double spacing = 0.05);

/// Net number of eigenvalues crossing `level` rightwards minus leftwards.
/// Crossings are located from jumps of the counting function between grid
/// nodes and bisected down to `refine_tol` in t.
FlowResult spectral_flow(const path::OperatorPath& p, double level, std::span<const double> t_grid,
                         double refine_tol = 1e-6);

/// Same, reusing precomputed branches for the grid.
FlowResult spectral_flow(const path::OperatorPath& p, double level, std::span<const double> t_grid,
                         const Eigen::MatrixXd& branches, double refine_tol = 1e-6);

/// CSV rows: t_cross,direction,multiplicity (header included).
void write_csv(std::ostream& os, std::span<const CrossingEvent> events);

}  // namespace specflow::flow
