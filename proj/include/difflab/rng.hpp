#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace difflab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/*
 * Counter-based random stream.
 *
 * A stream is addressed by (seed, realization, step). The k-th draw of a
 * stream is a pure function of that address and k, so the numbers consumed
 * by realization i at step s never depend on which thread ran it, on how
 * the run was split into advance() calls, or on what other realizations did.
 *
 * Satisfies std::uniform_random_bit_generator.
 */
class CounterStream {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  CounterStream(std::uint64_t seed, std::uint64_t realization,
                std::uint64_t step) noexcept
      : key_(mix64(mix64(mix64(seed + 0x5851f42d4c957f2dULL) ^ realization) +
                   step * kGamma)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open_zero() noexcept {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (consumes two draws, keeps one variate).
  double normal() noexcept {
    const double u1 = uniform_open_zero();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace difflab
