#pragma once

#include <cmath>
#include <cstdint>

namespace cvshrink {

/// Seed/stream pair identifying one reproducible draw sequence.
///
/// Identical (seed, stream_id) yields identical sequences on every platform:
/// all distributions below are implemented in-house on top of a pinned
/// generator instead of the (implementation-defined) <random> distributions.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// xoshiro256++ generator seeded via SplitMix64 from (seed, stream_id).
///
/// Algorithm pinned for reproducibility of published seeds:
///   state = four SplitMix64 outputs starting from
///           seed + (stream_id + 1) * 0x9E3779B97F4A7C15.
/// Uniform doubles take the top 53 bits; bounded integers use Lemire's
/// multiply-with-rejection; normals use the Marsaglia polar method;
/// gammas use Marsaglia-Tsang. Rejection steps consume a variable number
/// of raw draws, which is part of the pinned behaviour.
class Rng {
 public:
  explicit Rng(RngState state) : Rng(state.seed, state.stream_id) {}

  Rng(std::uint64_t seed, std::uint64_t stream_id = 0) {
    std::uint64_t sm = seed + (stream_id + 1) * 0x9E3779B97F4A7C15ULL;
    for (auto& word : s_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound). bound must be >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    // Lemire's nearly-divisionless method.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via the polar method (no trig, one cached value).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * m;
    has_cached_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, rate) draw, Marsaglia-Tsang with the shape<1 boost.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace cvshrink
