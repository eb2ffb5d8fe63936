#pragma once

#include "gscp/solver.hpp"

namespace gscp {

// Counts consecutive outer iterations with an unchanged support set. Empty
// supports never advance the count: an all-zero block is routine while the
// penalty still exceeds the data scale, and pruning on it would discard every
// column.
class SupportTracker {
public:
  explicit SupportTracker(int window);

  // Records the support after one outer iteration and returns true when the
  // streak of equal nonempty observations has reached `window`.
  bool observe(const std::vector<Eigen::Index>& supp);

  int stable_count() const { return stable_count_; }
  const std::vector<Eigen::Index>& last_support() const { return last_support_; }
  int window() const { return window_; }

private:
  int window_;
  int stable_count_ = 0;
  std::vector<Eigen::Index> last_support_;
};

// Keeps only the listed columns in every factor. Reconstruction is unchanged
// when `keep` is exactly the support of the last-mode factor. An empty keep
// list returns an empty (rank zero) factor set; the caller decides what a
// fully collapsed model means.
FactorSet prune(const FactorSet& fs, const std::vector<Eigen::Index>& keep);

// outer_solve plus rank reduction: once the support set has been stable for
// `stability_window` iterations, dead columns are removed from the factors and
// the anchors, the penalty is dropped, and the last mode continues as an
// unconstrained least-squares block. The support cannot change after the
// prune, so the returned rank is the detected column count.
SolveResult outer_solve_rr(const DenseTensor& t, const SolverConfig& cfg,
                           int stability_window = 20);

}  // namespace gscp
