#pragma once

#include <cstdint>
#include <numbers>
#include <random>

namespace gscp {

// Deterministic random source. std::mt19937_64 plus explicit Box-Muller and
// bit-shift uniforms, so streams are identical across standard libraries;
// std::normal_distribution would not be.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; draws two uniforms per pair of outputs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 shifted into (0, 1] so the log is finite.
    double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gscp
