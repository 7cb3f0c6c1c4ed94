#pragma once

// Ensembles of summed i.i.d. random increments, X(n) = x_1 + ... + x_n,
// followed realization by realization as n grows, and their binned
// relative-frequency densities.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "difflab/rng.hpp"

namespace difflab {

enum class StepKind { Rademacher, UniformSymmetric, Gaussian, DiscreteTable };

/// Law of a single increment. Always has finite, strictly positive variance.
class StepDistribution {
 public:
  /// +1 or -1 with equal probability.
  static StepDistribution rademacher();
  /// Uniform on [-half_width, half_width].
  static StepDistribution uniform_symmetric(double half_width);
  static StepDistribution gaussian(double mean, double stddev);
  /// Finite table. Weights are normalized to sum to 1; they must be
  /// nonnegative with a positive total, and the law must not be a point mass.
  static StepDistribution discrete_table(std::vector<double> values,
                                         std::vector<double> weights);

  StepKind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  double stddev() const;

  /// Kind-specific parameters: {a} for UniformSymmetric, {mu, sigma} for
  /// Gaussian, empty otherwise.
  const std::vector<double>& params() const noexcept { return params_; }
  const std::vector<double>& table_values() const noexcept { return values_; }
  const std::vector<double>& table_weights() const noexcept { return weights_; }

  double sample(CounterStream& stream) const;

  /// Stable human-readable identifier, e.g. "gaussian(mu=0,sigma=1)".
  std::string describe() const;

  friend bool operator==(const StepDistribution&,
                         const StepDistribution&) = default;

 private:
  StepDistribution() = default;

  StepKind kind_ = StepKind::Rademacher;
  double mean_ = 0.0;
  double variance_ = 1.0;
  std::vector<double> params_;
  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

std::string to_string(StepKind kind);

/*
 * N_Total realizations of X(n) evolved together.
 *
 * The size never changes after construction. At n = 0 every realization is
 * 0 (all content released at the origin). Increment s of realization i is
 * drawn from CounterStream(seed, i, s), s = 1, 2, ..., so the values depend
 * only on (seed, dist, N_Total, n) and not on how advance() calls were split
 * or how many threads ran them.
 */
class Ensemble {
 public:
  Ensemble(std::size_t n_total, StepDistribution dist, std::uint64_t seed);

  /// Rebuilds an ensemble from stored state; used by engines that evolve
  /// realizations under extra rules (bounded domains).
  static Ensemble from_state(std::vector<double> values, std::uint64_t n,
                             StepDistribution dist, std::uint64_t seed);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::uint64_t steps() const noexcept { return n_; }
  const StepDistribution& distribution() const noexcept { return dist_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Adds delta_n fresh increments to every realization. delta_n >= 1.
  void advance(std::uint64_t delta_n);

 private:
  std::vector<double> values_;
  std::uint64_t n_ = 0;
  StepDistribution dist_;
  std::uint64_t seed_ = 0;
};

Ensemble init_ensemble(std::size_t n_total, StepDistribution dist,
                       std::uint64_t seed);
Ensemble advance(Ensemble ensemble, std::uint64_t delta_n);

/// Relative-frequency density over half-open bins [edge[i], edge[i+1]).
/// Values outside the edges are counted in underflow/overflow, so
/// sum(counts) + underflow + overflow == n_total.
struct EmpiricalDensity {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  std::uint64_t n_total = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double width(std::size_t bin) const { return edges[bin + 1] - edges[bin]; }
  /// N_i / (N_Total * width_i)
  double density(std::size_t bin) const;
  std::vector<double> densities() const;
  /// Fraction of realizations in bin i.
  double mass(std::size_t bin) const;
  /// Integral of the density over all bins, i.e. in-range fraction.
  double integral() const;
  std::uint64_t in_range() const;
};

/// Throws std::invalid_argument unless edges has >= 2 strictly increasing
/// finite entries.
void validate_edges(std::span<const double> edges);

EmpiricalDensity histogram(std::span<const double> values,
                           std::vector<double> edges);
EmpiricalDensity histogram(const Ensemble& ensemble, std::vector<double> edges);
/// Freedman-Diaconis binning refit to the current snapshot.
EmpiricalDensity histogram(const Ensemble& ensemble);

/// Equal-width bins of width 2*IQR/N^(1/3) covering [min, max]. Falls back
/// to sqrt(N) bins when the IQR is zero, and to a unit bin around the value
/// when all values coincide.
std::vector<double> freedman_diaconis_edges(std::span<const double> values);

/// `bins` equal-width bins spanning [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

/// Bins of width `spacing` centered on the lattice points
/// center + k*spacing for k in [k_lo, k_hi].
std::vector<double> lattice_edges(double center, double spacing,
                                  std::int64_t k_lo, std::int64_t k_hi);

struct Moments {
  double mean = 0.0;
  /// Unbiased (N - 1) estimator.
  double variance = 0.0;
};

/// Two-pass compensated moments in fixed order. Requires >= 2 values.
Moments sample_moments(std::span<const double> values);
Moments sample_moments(const Ensemble& ensemble);

/// Effective probabilities after adding realizations to one interval, kept
/// as exact integer ratios numerator[i] / denominator.
struct EffectiveProbabilities {
  std::vector<std::uint64_t> numerators;
  std::uint64_t denominator = 0;

  double probability(std::size_t bin) const;
  std::uint64_t numerator_sum() const;
};

/// Adds n_extra realizations to interval j (1-based, 1 <= j <= I) and
/// renormalizes every interval by the enlarged total N_Total + n_extra.
EffectiveProbabilities inject_realizations(const EmpiricalDensity& density,
                                           std::size_t interval,
                                           std::uint64_t n_extra);

/// Exact law of a sum of n Rademacher signs on {-n, -n+2, ..., n}.
struct RademacherPmf {
  unsigned n = 0;
  /// ways[k] = number of sign sequences summing to -n + 2k.
  std::vector<std::uint64_t> ways;

  std::uint64_t total() const noexcept { return std::uint64_t{1} << n; }
  std::int64_t value(std::size_t k) const noexcept {
    return -static_cast<std::int64_t>(n) + 2 * static_cast<std::int64_t>(k);
  }
  double probability(std::size_t k) const {
    return static_cast<double>(ways[k]) / static_cast<double>(total());
  }
};

inline constexpr unsigned kMaxExactRademacherSteps = 24;

/// Throws std::invalid_argument for n > kMaxExactRademacherSteps.
RademacherPmf exact_pmf_rademacher(unsigned n);

}  // namespace difflab
