#pragma once

#include <cstdint>

#include "gscp/tensor.hpp"

namespace gscp {

// ||t - reconstruct(fs)|| / ||t||. Throws std::domain_error when ||t|| == 0.
double rel_err(const DenseTensor& t, const FactorSet& fs);

// Greedy matching of estimated components to reference components by absolute
// cosine of the stacked mode-1..N-1 signatures (product of per-mode cosines).
struct AlignmentResult {
  // match[e] is the reference column paired with estimated column e, -1 if
  // unmatched (zero component or both sides exhausted).
  std::vector<int> match;
  std::vector<double> cosines; // |cos| for matched estimated columns, 0 otherwise
  std::vector<double> scales;  // least-squares scale mapping est last-mode col onto ref
  int matched_rank = 0;
};

AlignmentResult align_components(const FactorSet& estimated, const FactorSet& reference);

// Root mean squared error between two last-mode coefficient matrices,
// sqrt(sum (ref - reg)^2 / (rows * cols)). Throws std::invalid_argument on
// shape mismatch.
double rmsep(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& regressed);

// Reference-shaped matrix whose column r is the matched, rescaled estimated
// last-mode column, or zero when nothing matched r.
Eigen::MatrixXd regressed_coefficients(const FactorSet& estimated, const FactorSet& reference,
                                       const AlignmentResult& alignment);

struct AlsResult {
  FactorSet factors;
  std::vector<double> rel_errs; // one per completed sweep
  int sweeps = 0;
};

// Unconstrained alternating least squares with fixed column count. Factors
// start as unnormalized Gaussian draws; each block solve uses the
// pseudoinverse of the Gram matrix with singular values below 1e-12 of the
// largest treated as zero. Stops when the RelErr improvement falls below tol.
AlsResult cp_als(const DenseTensor& t, int rank, int max_iters, double tol,
                 std::uint64_t seed);

}  // namespace gscp
