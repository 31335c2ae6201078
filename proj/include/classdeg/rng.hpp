#pragma once

#include <cstdint>
#include <vector>

#include "classdeg/errors.hpp"

namespace classdeg {

/// Counter-based 64-bit generator (SplitMix64 finalizer over an
/// incrementing counter). Output k of stream `seed` is
/// mix64(seed + (k+1) * 0x9E3779B97F4A7C15), so identical seeds give
/// identical streams on every platform, with no hidden global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  /// Independent child stream for a worker/trial index.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ULL));
  }

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Index i drawn with probability weights[i] / sum(weights).
  /// Weights must be nonnegative with a positive sum.
  int next_categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw DomainError("categorical draw from zero-mass weights");
    double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw DomainError("next_below(0)");
    return next_u64() % n;  // n is tiny in this codebase; modulo bias is negligible
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace classdeg
