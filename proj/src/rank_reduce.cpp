#include "gscp/rank_reduce.hpp"

#include <stdexcept>

#include "engine.hpp"

namespace gscp {

SupportTracker::SupportTracker(int window) : window_(window) {
  if (window < 1) throw std::invalid_argument("SupportTracker window must be >= 1");
}

bool SupportTracker::observe(const std::vector<Eigen::Index>& supp) {
  if (!supp.empty() && supp == last_support_)
    stable_count_ = std::min(stable_count_ + 1, window_);
  else
    stable_count_ = 0;
  last_support_ = supp;
  return stable_count_ >= window_;
}

FactorSet prune(const FactorSet& fs, const std::vector<Eigen::Index>& keep) {
  const Eigen::Index r = fs.rank();
  for (Eigen::Index j : keep)
    if (j < 0 || j >= r) throw std::out_of_range("prune: column index out of range");

  FactorSet out;
  out.factors.reserve(fs.factors.size());
  for (const FactorMatrix& a : fs.factors) {
    FactorMatrix b(a.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) b.col(static_cast<Eigen::Index>(c)) = a.col(keep[c]);
    out.factors.push_back(std::move(b));
  }
  return out;
}

SolveResult outer_solve_rr(const DenseTensor& t, const SolverConfig& cfg,
                           int stability_window) {
  return detail::run_engine(t, cfg, true, stability_window);
}

}  // namespace gscp
