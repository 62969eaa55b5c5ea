#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace skillmix {

/// SplitMix64 finalizer. Used to decorrelate seeds before they reach an
/// engine, so that nearby seeds (42, 43) do not yield related streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over bytes; a portable way to key streams by string ids.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent seed for a named purpose ("holdout", "judge", ...)
/// from the run's global seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  return mix64(seed ^ mix64(fnv1a64(purpose)));
}

/// Deterministic random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; the distributions below are
/// implemented here because the standard library's are not portable.
///
/// Stream splitting: the stream for (seed, index) is seeded with
/// mix64(seed) XOR index. Every per-task draw in the library goes through
/// this so results never depend on thread scheduling.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index) : engine_(mix64(seed) ^ index) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    // Rejection sampling against the largest multiple of bound.
    const std::uint64_t limit = std::uint64_t(0) - (std::uint64_t(0) - bound) % bound;
    for (;;) {
      const std::uint64_t x = engine_();
      if (limit == 0 || x < limit) return x % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Standard normal via Box-Muller (first variate only).
  double normal();

 private:
  std::mt19937_64 engine_;
};

inline double RandomStream::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace skillmix
