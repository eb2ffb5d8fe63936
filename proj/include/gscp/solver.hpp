#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gscp/prox.hpp"
#include "gscp/tensor.hpp"

namespace gscp {

struct SolverConfig {
  int rank_init = 0;          // initial column count, required > 0
  double epsilon = 1e-5;      // proximal damping added to every column step
  int inner_iters = 7;        // m; each block runs m+1 coordinate cycles
  double gamma = 0.9;         // extrapolation weight cap
  double lambda_max = 1000.0; // penalty start
  double lambda_min = 1e-4;   // penalty floor
  double kappa = 0.97;        // geometric penalty decay per outer iteration
  double stop_tol = 1e-6;     // threshold on |RelErr_{k-1} - RelErr_k|
  int max_outer = 2000;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

enum class SolveStatus { Converged, MaxIters };

std::string to_string(SolveStatus s);

// One record per outer iteration.
struct TraceRow {
  int k = 0;
  double objective = 0.0;      // F = f + lambda * support size
  double rel_err = 0.0;
  double lambda = 0.0;         // penalty in force this iteration, 0 once dropped
  double w = 0.0;              // extrapolation weight
  int support_size = 0;        // nonzero columns of the last-mode factor
  bool safeguard_used = false; // true when the sweep was redone unextrapolated
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  SolveStatus status = SolveStatus::MaxIters;
  double wall_seconds = 0.0;

  // Diagnostics kept in memory, not written to trace files.
  int descent_violations = 0;     // safeguarded descent failures beyond rounding slack
  double max_unit_deviation = 0.0; // worst | ||col|| - 1 | over constrained modes
  std::vector<double> step_norms; // ||X^{k+1} - X^k||_F per iteration
  int last_support_change_k = 0;  // latest k whose support set differs from k-1
  int prune_k = -1;               // iteration that dropped dead columns, -1 if none
  double prune_rel_err_before = 0.0;
  double prune_rel_err_after = 0.0;

  int iterations() const { return static_cast<int>(rows.size()); }
};

struct SolveResult {
  FactorSet factors;
  SolveTrace trace;
};

// Nesterov-style extrapolation weights capped at gamma. Weight 0 twice, then
// strictly increasing toward the cap. next() returns w_k and advances.
class ExtrapolationSchedule {
public:
  double next(double gamma);

private:
  double t_prev_ = 1.0;
  double t_curr_ = 1.0;
};

// One geometric continuation step: max(lambda_min, kappa * lambda).
double lambda_step(double lambda, double kappa, double lambda_min);

// Cyclic proximal coordinate descent over the columns of one factor block.
// x_unf is the data unfolded along `mode`; `eval` supplies the fixed blocks of
// the other modes and the starting value eval.factors[mode]. Runs
// inner_iters + 1 full cycles with per-column steps 1/(epsilon + d_j^T d_j)
// and returns the updated block.
FactorMatrix sub_bc_pgd(const Eigen::MatrixXd& x_unf, const FactorSet& eval, int mode,
                        int inner_iters, double epsilon, const ProxKind& prox);

// Double-loop solver: sweeps the modes with extrapolated anchors, keeps modes
// 1..N-1 on the unit sphere, and drives the column-count penalty on the last
// mode from lambda_max down to lambda_min. Columns of the last-mode factor
// that the penalty zeroes stay in place (the returned rank equals rank_init).
// Stops when the RelErr change falls below stop_tol after the penalty has
// reached its floor, or at max_outer.
SolveResult outer_solve(const DenseTensor& t, const SolverConfig& cfg);

// Nonzero-column indices of the last-mode factor (exact zero test).
std::vector<Eigen::Index> support(const FactorMatrix& last_mode);

}  // namespace gscp
