#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace metags {

// 64-bit FNV-1a. Used for content keys (corpus hashes, config fingerprints)
// and for folding strings into RNG stream keys.
inline uint64_t fnv1a(std::string_view bytes, uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t fnv1a_u64(uint64_t v, uint64_t h = 1469598103934665603ull) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (i * 8)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

// Deterministic splitmix64 stream. Every randomized component in the project
// draws from an Rng derived from (seed, key...) so results are reproducible
// across runs and platforms and independent of evaluation order; the standard
// <random> distributions are avoided because their output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Derives an independent stream from a seed plus a list of subkeys.
  static Rng derive(uint64_t seed, std::initializer_list<uint64_t> keys) {
    uint64_t h = fnv1a_u64(seed);
    for (uint64_t k : keys) h = fnv1a_u64(k, h);
    return Rng(h);
  }
  static uint64_t key(std::string_view s) { return fnv1a(s); }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n). n must be > 0.
  uint64_t next_below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second draw is cached.
  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Index draw with probability proportional to non-negative weights.
  size_t weighted_index(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double t = next_double() * total;
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (t < acc) return i;
    }
    // total == 0 or rounding spill: last positive-weight entry.
    for (size_t i = w.size(); i > 0; --i) {
      if (w[i - 1] > 0.0) return i - 1;
    }
    return w.size() - 1;
  }

 private:
  uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace metags
