#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "icroute/core.hpp"

namespace icroute {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// SplitMix64 sequence. Reductions are implemented here rather than with
/// <random> distributions so that streams are identical across standard
/// library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state = 0) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t uniform(std::uint64_t n) {
    if (n <= 1) {
      return 0;
    }
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t state_;
};

/// Independent reproducible sub-stream for (seed, node, purpose). Streams for
/// different nodes or purposes never share state.
inline RngStream derive_rng_stream(std::uint64_t seed, NodeId node, std::string_view purpose) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(node) * 0xD1B54A32D192ED03ULL));
  s = splitmix64(s ^ fnv1a(purpose));
  return RngStream(s);
}

}  // namespace icroute
