#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>

namespace cnc {

/// Counter-based random stream.
///
/// Draw number `position` of a stream with key `seed` is
///   splitmix64_mix(mix(seed) + (position + 1) * 0x9e3779b97f4a7c15)
/// which is the SplitMix64 sequence started at mix(seed). Because every draw
/// is a pure function of (seed, position), two streams in the same state
/// always produce the same next value on every platform. All derived
/// distributions below are implemented here rather than through <random>,
/// whose distribution algorithms are implementation-defined.
class RngStream {
public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t position = 0)
      : seed_(seed), key_(mix(seed)), position_(position) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    ++position_;
    return mix(key_ + position_ * kGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) {
      throw std::invalid_argument("uniform_index: empty range");
    }
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      __extension__ using u128 = unsigned __int128;
      const u128 m = static_cast<u128>(next_u64()) * static_cast<u128>(n);
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Poisson variate. Knuth multiplication for small means, otherwise the
  /// PTRS transformed-rejection method (Hormann 1993).
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
      throw std::invalid_argument("poisson: mean must be finite and non-negative");
    }
    if (mean == 0.0) {
      return 0;
    }
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      std::uint64_t k = 0;
      double prod = uniform();
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) {
        return static_cast<std::uint64_t>(k);
      }
      if (k < 0.0 || (us < 0.013 && v > us)) {
        continue;
      }
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -mean + k * loglam - std::lgamma(k + 1.0)) {
        return static_cast<std::uint64_t>(k);
      }
    }
  }

  /// Independent stream keyed by (seed, index). Does not advance this stream.
  RngStream child(std::uint64_t index) const {
    return RngStream(mix(key_ ^ mix(index + 0x632be59bd9b4e019ULL)));
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.seed_ == b.seed_ && a.position_ == b.position_;
  }

private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t position_;
};

}  // namespace cnc
