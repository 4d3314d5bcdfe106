#pragma once

#include <cmath>
#include <cstdint>

namespace infpos {

// Counter-based random stream. Every (seed, record, trp, purpose) tuple maps
// to an independent substream, so dataset generation is order-independent and
// bit-reproducible across platforms regardless of how work is scheduled.
// The generator is splitmix64; all distributions are derived here rather than
// through <random>, whose distributions are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller. Consumes exactly two draws.
  double normal() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Independent standard normal pair (one Box-Muller transform, two draws).
  void normal_pair(double& a, double& b) {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925287 * u2;
    a = r * std::cos(t);
    b = r * std::sin(t);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

 private:
  std::uint64_t state_;
};

namespace rng_purpose {
inline constexpr std::uint64_t kUePosition = 1;
inline constexpr std::uint64_t kLosDraw = 2;
inline constexpr std::uint64_t kLink = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kShuffle = 5;
inline constexpr std::uint64_t kInit = 6;
}  // namespace rng_purpose

inline std::uint64_t scramble(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives the substream state for (master seed, a, b, purpose).
inline RngStream substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t purpose) {
  std::uint64_t s = scramble(seed + 0x9e3779b97f4a7c15ull);
  s = scramble(s ^ (a + 0xd1b54a32d192ed03ull));
  s = scramble(s ^ (b + 0x8cb92ba72f3d8dd7ull));
  s = scramble(s ^ (purpose + 0xda942042e4dd58b5ull));
  return RngStream(s);
}

}  // namespace infpos
