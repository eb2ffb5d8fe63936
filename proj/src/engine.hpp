#pragma once

#include "gscp/rng.hpp"
#include "gscp/solver.hpp"

namespace gscp::detail {

// Shared double-loop implementation behind outer_solve and outer_solve_rr.
// stability_window is ignored unless rank_reduce is set.
SolveResult run_engine(const DenseTensor& t, const SolverConfig& cfg, bool rank_reduce,
                       int stability_window);

// Gaussian factor block filled in storage order (per column, then per row).
FactorMatrix random_factor(Rng& rng, Eigen::Index rows, Eigen::Index cols);

}  // namespace gscp::detail
