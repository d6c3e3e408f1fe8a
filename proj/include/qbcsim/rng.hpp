#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qbcsim/errors.hpp"

namespace qbc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream with hierarchical substream splitting.
// Substream keys are derived from the parent key, not the generator state,
// so per-trial results are independent of evaluation order. Variate
// transforms are hand-rolled on top of mt19937_64 output to keep sequences
// identical across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key)
      : key_(key), gen_(splitmix64(key ^ 0xc2b2ae3d27d4eb4fULL)) {}

  RandomStream substream(std::uint64_t id) const {
    return RandomStream(splitmix64(key_ ^ (0x9e3779b97f4a7c15ULL * (id + 1))));
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Exponential variate with the given mean.
  double exponential(double mean) {
    if (mean <= 0.0) throw InvalidParams("exponential: mean must be positive");
    return -mean * std::log1p(-uniform());
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidParams("below: n must be positive");
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t draw;
    do {
      draw = gen_();
    } while (draw >= limit);
    return draw % n;
  }

 private:
  std::uint64_t key_;
  std::mt19937_64 gen_;
};

}  // namespace qbc
