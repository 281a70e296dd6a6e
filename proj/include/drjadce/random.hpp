#pragma once

#include "drjadce/linalg.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace drjadce {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive hash of a seed and a list of stream indices.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/**
 * Seedable generator with cheap splitting. Each substream is a fresh
 * mt19937_64 seeded from derive_seed(seed, path), so concurrent trials never
 * share state.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  Rng split(std::initializer_list<std::uint64_t> path) const {
    return Rng(derive_seed(seed_, path));
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double normal() { return normal_(engine_); }

  /// Circularly-symmetric complex Gaussian with unit variance.
  cplx complex_normal() {
    constexpr double k = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {k * re, k * im};
  }

  CMatrix complex_normal(Index rows, Index cols, double variance = 1.0) {
    CMatrix m(rows, cols);
    const double s = std::sqrt(variance);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = s * complex_normal();
    }
    return m;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace drjadce
