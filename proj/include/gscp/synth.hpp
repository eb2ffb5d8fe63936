#pragma once

#include <cstdint>

#include "gscp/tensor.hpp"

namespace gscp {

struct SynthSpec {
  std::vector<Eigen::Index> shape;
  int rank = 0;
  double weight_lo = 0.5;
  double weight_hi = 2.0;
  double noise_level = 0.0; // target ||noise|| / ||signal||
  std::uint64_t seed = 0;
};

struct SynthData {
  DenseTensor tensor;
  FactorSet truth; // modes 1..N-1 unit columns, last mode carries the weights
};

// Random low-rank tensor with known factors. Modes 1..N-1 get unit-normalized
// Gaussian columns; each last-mode column is a unit Gaussian direction scaled
// by a weight drawn uniformly from [weight_lo, weight_hi]. Gaussian noise is
// rescaled so the noise-to-signal norm ratio equals noise_level exactly.
SynthData make_synthetic(const SynthSpec& spec);

}  // namespace gscp
