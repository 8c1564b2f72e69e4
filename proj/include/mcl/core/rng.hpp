#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mcl {

// Deterministic random source. Distributions are implemented by hand because
// the std:: distribution objects are not bit-stable across standard library
// implementations; mt19937_64 itself is fully specified.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Derive a child seed from a parent seed and a list of tokens
  // (e.g. {step, slot}). SplitMix64-style mixing, order sensitive.
  static uint64_t derive(uint64_t seed, std::initializer_list<uint64_t> tokens) {
    uint64_t h = seed;
    for (uint64_t t : tokens) {
      h += 0x9e3779b97f4a7c15ull + t;
      h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
      h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
      h = h ^ (h >> 31);
    }
    return h;
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  int64_t uniform_int(int64_t n) {
    // Rejection sampling to avoid modulo bias.
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<int64_t>(x % un);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (no cached spare, keeps state simple).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      int64_t j = uniform_int(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcl
