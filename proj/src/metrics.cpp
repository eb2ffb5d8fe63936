#include "gscp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "engine.hpp"
#include "gscp/rng.hpp"

namespace gscp {

double rel_err(const DenseTensor& t, const FactorSet& fs) {
  double xn = t.norm();
  if (xn == 0.0) throw std::domain_error("rel_err: undefined for an all-zero tensor");
  DenseTensor rec = reconstruct(fs);
  return (t.vec() - rec.vec()).norm() / xn;
}

namespace {

// Product of per-mode cosines over all modes except the last; the last mode
// carries the component scale and is compared separately.
double signature_cosine(const FactorSet& a, const FactorSet& b, Eigen::Index ca,
                        Eigen::Index cb) {
  double c = 1.0;
  for (int i = 0; i + 1 < a.order(); ++i) {
    double na = a.factors[i].col(ca).norm();
    double nb = b.factors[i].col(cb).norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    c *= a.factors[i].col(ca).dot(b.factors[i].col(cb)) / (na * nb);
  }
  return c;
}

}  // namespace

AlignmentResult align_components(const FactorSet& estimated, const FactorSet& reference) {
  if (estimated.order() != reference.order())
    throw std::invalid_argument("align_components: order mismatch");
  const int last = estimated.order() - 1;
  const Eigen::Index re = estimated.rank();
  const Eigen::Index rr = reference.rank();

  AlignmentResult out;
  out.match.assign(re, -1);
  out.cosines.assign(re, 0.0);
  out.scales.assign(re, 0.0);

  struct Cand {
    double abs_cos;
    Eigen::Index e, r;
  };
  std::vector<Cand> cands;
  for (Eigen::Index e = 0; e < re; ++e) {
    if (estimated.factors[last].col(e).isZero(0.0)) continue; // dead component
    for (Eigen::Index r = 0; r < rr; ++r)
      cands.push_back({std::abs(signature_cosine(estimated, reference, e, r)), e, r});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.abs_cos != b.abs_cos) return a.abs_cos > b.abs_cos;
    return std::tie(a.e, a.r) < std::tie(b.e, b.r);
  });

  std::vector<bool> used_e(re, false), used_r(rr, false);
  for (const Cand& c : cands) {
    if (used_e[c.e] || used_r[c.r]) continue;
    used_e[c.e] = true;
    used_r[c.r] = true;
    out.match[c.e] = static_cast<int>(c.r);
    out.cosines[c.e] = c.abs_cos;
    const auto& ce = estimated.factors[last].col(c.e);
    const auto& cr = reference.factors[last].col(c.r);
    double denom = ce.squaredNorm();
    out.scales[c.e] = denom > 0.0 ? ce.dot(cr) / denom : 0.0;
    ++out.matched_rank;
  }
  return out;
}

double rmsep(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& regressed) {
  if (reference.rows() != regressed.rows() || reference.cols() != regressed.cols())
    throw std::invalid_argument("rmsep: shape mismatch");
  double n = static_cast<double>(reference.size());
  return std::sqrt((reference - regressed).squaredNorm() / n);
}

Eigen::MatrixXd regressed_coefficients(const FactorSet& estimated, const FactorSet& reference,
                                       const AlignmentResult& alignment) {
  const int last = reference.order() - 1;
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(reference.factors[last].rows(), reference.rank());
  for (std::size_t e = 0; e < alignment.match.size(); ++e) {
    int r = alignment.match[e];
    if (r < 0) continue;
    out.col(r) = alignment.scales[e] * estimated.factors[last].col(static_cast<Eigen::Index>(e));
  }
  return out;
}

namespace {

Eigen::MatrixXd pinv_spd(const Eigen::MatrixXd& g) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Eigen::MatrixXd::Zero(g.cols(), g.rows());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * sv(0)) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

AlsResult cp_als(const DenseTensor& t, int rank, int max_iters, double tol,
                 std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("cp_als: rank must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("cp_als: max_iters must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("cp_als: tol must be >= 0");

  const int n = t.order();
  std::vector<Eigen::MatrixXd> unf(n);
  for (int i = 0; i < n; ++i) unf[i] = unfold(t, i);

  Rng rng(seed);
  AlsResult res;
  res.factors.factors.reserve(n);
  for (int i = 0; i < n; ++i)
    res.factors.factors.push_back(detail::random_factor(rng, t.dim(i), rank));

  for (int s = 0; s < max_iters; ++s) {
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd d = kr_complement(res.factors, i);
      Eigen::MatrixXd gram = d.transpose() * d;
      res.factors.factors[i] = (unf[i] * d) * pinv_spd(gram);
    }
    res.rel_errs.push_back(rel_err(t, res.factors));
    res.sweeps = s + 1;
    std::size_t m = res.rel_errs.size();
    if (m >= 2 && std::abs(res.rel_errs[m - 2] - res.rel_errs[m - 1]) < tol) break;
  }
  return res;
}

}  // namespace gscp
