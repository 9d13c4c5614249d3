#pragma once

#include <cstdint>
#include <random>

namespace jcas {

// Single source of nondeterminism for a simulation instance. All draws go
// through the fabric-owned instance so that (scenario, seed) fully determines
// a run. Gaussian draws use Box-Muller on raw 64-bit output rather than
// std::normal_distribution, whose draw sequence is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  double gaussian(double sigma);

 private:
  std::mt19937_64 engine_;
  bool have_spare_{false};
  double spare_{0.0};
};

}  // namespace jcas
