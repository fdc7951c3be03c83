#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace biaspot {

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive child seeds
// so that e.g. trial (d, n, k) owns an RNG stream independent of execution
// order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return mix64(seed); }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t part, Rest... rest) {
  return derive_seed(mix64(seed ^ mix64(part)), rest...);
}

// mt19937_64 raw output is specified by the standard, so streams are portable;
// the transforms below are hand-rolled because std::*_distribution is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double exponential() { return -std::log1p(-uniform01()); }

  // Box-Muller, one deviate per call (no cached pair, keeps draw counts obvious)
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586477 * u2);
  }

  double sign() { return (next_u64() & 1ull) ? -1.0 : 1.0; }

  // unbiased index in [0, n) (Lemire rejection)
  std::size_t uniform_index(std::size_t n) {
    using u128 = unsigned __int128;
    std::uint64_t x = next_u64();
    u128 m = static_cast<u128>(x) * static_cast<u128>(n);
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = (-n) % n;
      while (lo < t) {
        x = next_u64();
        m = static_cast<u128>(x) * static_cast<u128>(n);
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::size_t>(m >> 64);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace biaspot
