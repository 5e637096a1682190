#pragma once

#include <cstdint>
#include <random>

namespace rgi {

// std::uniform_real_distribution is implementation-defined; draws here are
// built directly on the engine output so sampled rooms match across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rgi
