#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace crawlsim {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Pure function of (seed, key): the same pair always yields the same value,
// independent of call order.
inline std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t key) noexcept {
  return splitmix64(splitmix64(seed) ^ key);
}

// Maps 64 random bits to [0, 1).
inline double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Sequential splitmix64 stream. Distribution helpers are hand-rolled so output
// never depends on the standard library's implementation-defined algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // [0, 1)
  double next_double() { return to_unit_interval(next_u64()); }

  // Unbiased integer in [0, bound); Lemire's multiply-shift with rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    assert(bound > 0);
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      auto wide = static_cast<unsigned __int128>(next_u64()) * bound;
      if (static_cast<std::uint64_t>(wide) >= threshold)
        return static_cast<std::uint64_t>(wide >> 64);
    }
  }

  // Fisher-Yates over the first k slots; afterwards items[0..k) is a uniform
  // sample without replacement.
  template <typename T>
  void partial_shuffle(std::vector<T>& items, std::size_t k) {
    const std::size_t n = items.size();
    if (k > n) k = n;
    for (std::size_t i = 0; i + 1 < n && i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
      std::swap(items[i], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    partial_shuffle(items, items.size());
  }

  // Knuth's product method; fine for the small means used here.
  std::uint64_t next_poisson(double mean) {
    assert(mean > 0.0);
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

  // Gamma with integer shape as a sum of exponentials.
  double next_gamma_int(unsigned shape) {
    double acc = 0.0;
    for (unsigned i = 0; i < shape; ++i) acc += -std::log(1.0 - next_double());
    return acc;
  }

  double next_beta_int(unsigned a, unsigned b) {
    const double x = next_gamma_int(a);
    const double y = next_gamma_int(b);
    return x / (x + y);
  }

 private:
  std::uint64_t state_;
};

}  // namespace crawlsim
