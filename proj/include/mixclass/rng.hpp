#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mixclass {

// Deterministic, platform-independent random primitives. Standard-library
// distributions are implementation-defined, which would break byte-identical
// reruns of the harness, so the few draws we need are hand-rolled here.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a tag path.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t s = base;
  splitmix64(s);
  s ^= 0x6a09e667f3bcc909ULL + a;
  splitmix64(s);
  s ^= 0xbb67ae8584caa73bULL + b;
  splitmix64(s);
  s ^= 0x3c6ef372fe94f82bULL + c;
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {
    // Warm up so that trivially related seeds decorrelate.
    for (int i = 0; i < 4; ++i) splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) without modulo bias.
  std::uint32_t uniform_int(std::uint32_t bound) {
    std::uint64_t x = next_u64() & 0xffffffffULL;
    std::uint64_t m = x * bound;
    std::uint32_t lo = static_cast<std::uint32_t>(m);
    if (lo < bound) {
      std::uint32_t t = (0u - bound) % bound;
      while (lo < t) {
        x = next_u64() & 0xffffffffULL;
        m = x * bound;
        lo = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  // Standard normal via Box-Muller; the spare is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  int sign_bit() { return (next_u64() & 1ULL) ? 1 : -1; }

  // First `count` elements of a uniform random permutation of [0, universe).
  std::vector<int> sample_without_replacement(int universe, int count) {
    std::vector<int> pool(universe);
    for (int i = 0; i < universe; ++i) pool[i] = i;
    std::vector<int> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
      int j = i + static_cast<int>(uniform_int(static_cast<std::uint32_t>(universe - i)));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stateless Gaussian keyed by a seed path: the same key always yields the same
// value. Used where two query plans must share randomness exactly.
inline double keyed_gaussian(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c) {
  std::uint64_t s = derive_seed(base, a, b, c);
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
  double u2 = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

// Gaussian truncated to |x| <= bound by re-drawing on an extended key lane.
inline double keyed_gaussian_bounded(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                     std::uint64_t c, double bound) {
  for (std::uint64_t lane = 0;; ++lane) {
    double x = keyed_gaussian(base, a, b, c + (lane << 32));
    if (std::abs(x) <= bound) return x;
  }
}

}  // namespace mixclass
