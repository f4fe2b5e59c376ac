#pragma once

// Deterministic randomness. mt19937_64's raw output sequence is fixed by the
// standard; the distribution functions are hand-rolled here because the
// std:: distributions are implementation-defined and would break seed
// reproducibility across toolchains.

#include <cstdint>
#include <random>
#include <vector>

namespace topoproto {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform01_open_low() { return 1.0 - uniform01(); }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();

  double gamma(double shape);            // Marsaglia-Tsang, any shape > 0
  double beta(double a, double b);

  template <class T>
  void shuffle(std::vector<T>& items) {  // Fisher-Yates
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a base seed (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace topoproto
