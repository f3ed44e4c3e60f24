#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace tmbn {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a path of
/// integer coordinates (round, member, target, ...). Order matters.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// The distributions below are written out rather than taken from <random>
// so that streams are identical across standard library implementations.

/// Uniform integer in [0, bound). bound must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Uniform integer in [lo, hi].
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

/// Uniform real in [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Bernoulli trials at 16-bit resolution, four per generator call. The
/// leftover bits are dropped when the object goes out of scope.
class ChunkedBernoulli {
 public:
  explicit ChunkedBernoulli(Rng& rng) : rng_(rng) {}

  /// Threshold for probability p: a trial succeeds when a 16-bit chunk is below it.
  static std::uint32_t limit(double p) {
    if (!(p > 0.0)) return 0;
    if (p >= 1.0) return 65536;
    return static_cast<std::uint32_t>(std::ceil(p * 65536.0));
  }

  bool operator()(std::uint32_t limit) {
    if (left_ == 0) {
      buf_ = rng_();
      left_ = 4;
    }
    --left_;
    const auto v = static_cast<std::uint32_t>(buf_ & 0xffffU);
    buf_ >>= 16;
    return v < limit;
  }

 private:
  Rng& rng_;
  std::uint64_t buf_ = 0;
  int left_ = 0;
};

}  // namespace tmbn
