#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace geovote {

/// SplitMix64 finalizer. Bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic, splittable PRNG.
///
/// The generator is SplitMix64: the state advances by the golden-ratio
/// increment 0x9E3779B97F4A7C15 and each output is `mix64(state)`.
/// Uniform doubles take the top 53 bits of an output. Normal deviates use
/// the Box-Muller transform with the second deviate cached. Child streams
/// are derived with `split(id)`, which seeds a new generator from
/// `mix64(seed ^ mix64(id + increment))`, so a (master seed, path of ids)
/// pair always names the same sequence regardless of evaluation order.
class Rng {
 public:
  static constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed), state_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    state_ += kIncrement;
    return mix64(state_);
  }

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Uses rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  double normal() noexcept {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson(lambda) deviate. lambda <= 0 returns 0.
  std::uint64_t poisson(double lambda) noexcept {
    if (!(lambda > 0.0)) return 0;
    if (lambda <= 30.0) {
      // Knuth: multiply uniforms until the product drops below e^-lambda.
      const double limit = std::exp(-lambda);
      std::uint64_t k = 0;
      double product = uniform();
      while (product > limit) {
        ++k;
        product *= uniform();
      }
      return k;
    }
    // Count unit-rate exponential arrivals inside [0, lambda).
    std::uint64_t k = 0;
    double t = 0.0;
    for (;;) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      t -= std::log(u);
      if (t >= lambda) return k;
      ++k;
    }
  }

  Rng split(std::uint64_t id) const noexcept { return Rng(mix64(seed_ ^ mix64(id + kIncrement))); }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace geovote
