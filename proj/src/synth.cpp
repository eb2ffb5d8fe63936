#include "gscp/synth.hpp"

#include <stdexcept>

#include "gscp/prox.hpp"
#include "gscp/rng.hpp"

namespace gscp {

SynthData make_synthetic(const SynthSpec& spec) {
  if (spec.shape.size() < 2) throw std::invalid_argument("synth: need order >= 2");
  for (Eigen::Index d : spec.shape)
    if (d < 1) throw std::invalid_argument("synth: dimensions must be positive");
  if (spec.rank < 1) throw std::invalid_argument("synth: rank must be >= 1");
  if (!(spec.weight_hi >= spec.weight_lo))
    throw std::invalid_argument("synth: weight range is inverted");
  if (!(spec.noise_level >= 0.0)) throw std::invalid_argument("synth: noise_level must be >= 0");

  const int n = static_cast<int>(spec.shape.size());
  Rng rng(spec.seed);

  SynthData out;
  out.truth.factors.reserve(n);
  for (int i = 0; i + 1 < n; ++i) {
    FactorMatrix a(spec.shape[i], spec.rank);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index row = 0; row < a.rows(); ++row) a(row, j) = rng.normal();
      a.col(j) = prox_unit_sphere(a.col(j));
    }
    out.truth.factors.push_back(std::move(a));
  }
  // Last mode: unit directions scaled by per-component weights, drawn as
  // direction entries first, then the weight, column by column.
  {
    FactorMatrix a(spec.shape[n - 1], spec.rank);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index row = 0; row < a.rows(); ++row) a(row, j) = rng.normal();
      a.col(j) = prox_unit_sphere(a.col(j)) * rng.uniform(spec.weight_lo, spec.weight_hi);
    }
    out.truth.factors.push_back(std::move(a));
  }

  out.tensor = reconstruct(out.truth);
  if (spec.noise_level > 0.0) {
    Eigen::VectorXd g(out.tensor.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    double gn = g.norm();
    if (gn > 0.0) out.tensor.vec() += (spec.noise_level * out.tensor.norm() / gn) * g;
  }
  return out;
}

}  // namespace gscp
