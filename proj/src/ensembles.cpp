#include "difflab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "difflab/parallel.hpp"

namespace difflab {

namespace {

std::string format_number(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

StepDistribution StepDistribution::rademacher() {
  StepDistribution d;
  d.kind_ = StepKind::Rademacher;
  d.mean_ = 0.0;
  d.variance_ = 1.0;
  return d;
}

StepDistribution StepDistribution::uniform_symmetric(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("uniform_symmetric: half-width must be > 0");
  }
  StepDistribution d;
  d.kind_ = StepKind::UniformSymmetric;
  d.mean_ = 0.0;
  d.variance_ = half_width * half_width / 3.0;
  d.params_ = {half_width};
  return d;
}

StepDistribution StepDistribution::gaussian(double mean, double stddev) {
  if (!std::isfinite(mean)) {
    throw std::invalid_argument("gaussian: mean must be finite");
  }
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    throw std::invalid_argument("gaussian: standard deviation must be > 0");
  }
  StepDistribution d;
  d.kind_ = StepKind::Gaussian;
  d.mean_ = mean;
  d.variance_ = stddev * stddev;
  d.params_ = {mean, stddev};
  return d;
}

StepDistribution StepDistribution::discrete_table(std::vector<double> values,
                                                  std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw std::invalid_argument(
        "discrete_table: values and weights must be non-empty and equal length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(weights[i]) ||
        weights[i] < 0.0) {
      throw std::invalid_argument(
          "discrete_table: values must be finite and weights nonnegative");
    }
    total += weights[i];
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("discrete_table: weights sum to zero");
  }
  for (auto& w : weights) w /= total;

  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += weights[i] * values[i];
  double variance = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    variance += weights[i] * d * d;
  }
  if (!(variance > 0.0)) {
    throw std::invalid_argument("discrete_table: point mass has zero variance");
  }

  StepDistribution d;
  d.kind_ = StepKind::DiscreteTable;
  d.mean_ = mean;
  d.variance_ = variance;
  d.cumulative_.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    d.cumulative_[i] = acc;
  }
  d.cumulative_.back() = 1.0;
  d.values_ = std::move(values);
  d.weights_ = std::move(weights);
  return d;
}

double StepDistribution::stddev() const { return std::sqrt(variance_); }

double StepDistribution::sample(CounterStream& stream) const {
  switch (kind_) {
    case StepKind::Rademacher:
      return (stream() >> 63) ? 1.0 : -1.0;
    case StepKind::UniformSymmetric:
      return params_[0] * (2.0 * stream.uniform() - 1.0);
    case StepKind::Gaussian:
      return params_[0] + params_[1] * stream.normal();
    case StepKind::DiscreteTable: {
      const double u = stream.uniform();
      const auto it =
          std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto idx = std::min<std::size_t>(
          static_cast<std::size_t>(it - cumulative_.begin()),
          values_.size() - 1);
      return values_[idx];
    }
  }
  return 0.0;
}

std::string StepDistribution::describe() const {
  switch (kind_) {
    case StepKind::Rademacher:
      return "rademacher";
    case StepKind::UniformSymmetric:
      return "uniform(a=" + format_number(params_[0]) + ")";
    case StepKind::Gaussian:
      return "gaussian(mu=" + format_number(params_[0]) +
             ",sigma=" + format_number(params_[1]) + ")";
    case StepKind::DiscreteTable: {
      std::string s = "table(";
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) s += ",";
        s += format_number(values_[i]) + ":" + format_number(weights_[i]);
      }
      return s + ")";
    }
  }
  return {};
}

std::string to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Rademacher: return "rademacher";
    case StepKind::UniformSymmetric: return "uniform";
    case StepKind::Gaussian: return "gaussian";
    case StepKind::DiscreteTable: return "table";
  }
  return {};
}

Ensemble::Ensemble(std::size_t n_total, StepDistribution dist,
                   std::uint64_t seed)
    : dist_(std::move(dist)), seed_(seed) {
  if (n_total == 0) {
    throw std::invalid_argument("ensemble: N_Total must be >= 1");
  }
  values_.assign(n_total, 0.0);
}

Ensemble Ensemble::from_state(std::vector<double> values, std::uint64_t n,
                              StepDistribution dist, std::uint64_t seed) {
  Ensemble e(values.size(), std::move(dist), seed);
  e.values_ = std::move(values);
  e.n_ = n;
  return e;
}

void Ensemble::advance(std::uint64_t delta_n) {
  if (delta_n == 0) {
    throw std::invalid_argument("advance: delta_n must be >= 1");
  }
  if (delta_n > std::numeric_limits<std::uint64_t>::max() - n_) {
    throw std::overflow_error("advance: step count overflows");
  }
  const std::uint64_t first = n_ + 1;
  const std::uint64_t last = n_ + delta_n;
  parallel_blocks(values_.size(), [&](std::size_t, std::size_t begin,
                                      std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double x = values_[i];
      for (std::uint64_t s = first; s <= last; ++s) {
        CounterStream stream(seed_, i, s);
        x += dist_.sample(stream);
      }
      values_[i] = x;
    }
  });
  n_ = last;
}

Ensemble init_ensemble(std::size_t n_total, StepDistribution dist,
                       std::uint64_t seed) {
  return Ensemble(n_total, std::move(dist), seed);
}

Ensemble advance(Ensemble ensemble, std::uint64_t delta_n) {
  ensemble.advance(delta_n);
  return ensemble;
}

double EmpiricalDensity::density(std::size_t bin) const {
  return static_cast<double>(counts.at(bin)) /
         (static_cast<double>(n_total) * width(bin));
}

std::vector<double> EmpiricalDensity::densities() const {
  std::vector<double> out(bins());
  for (std::size_t i = 0; i < bins(); ++i) out[i] = density(i);
  return out;
}

double EmpiricalDensity::mass(std::size_t bin) const {
  return static_cast<double>(counts.at(bin)) / static_cast<double>(n_total);
}

std::uint64_t EmpiricalDensity::in_range() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

double EmpiricalDensity::integral() const {
  return static_cast<double>(in_range()) / static_cast<double>(n_total);
}

void validate_edges(std::span<const double> edges) {
  if (edges.size() < 2) {
    throw std::invalid_argument("histogram: need at least 2 bin edges");
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i])) {
      throw std::invalid_argument("histogram: bin edges must be finite");
    }
    if (i > 0 && !(edges[i] > edges[i - 1])) {
      throw std::invalid_argument("histogram: bin edges must be strictly increasing");
    }
  }
}

EmpiricalDensity histogram(std::span<const double> values,
                           std::vector<double> edges) {
  validate_edges(edges);
  if (values.empty()) {
    throw std::invalid_argument("histogram: no values");
  }
  EmpiricalDensity h;
  h.counts.assign(edges.size() - 1, 0);
  h.n_total = values.size();
  const double lo = edges.front();
  const double hi = edges.back();
  for (double x : values) {
    if (x < lo) {
      ++h.underflow;
    } else if (!(x < hi)) {
      ++h.overflow;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), x);
      ++h.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
    }
  }
  h.edges = std::move(edges);
  return h;
}

EmpiricalDensity histogram(const Ensemble& ensemble, std::vector<double> edges) {
  return histogram(ensemble.values(), std::move(edges));
}

EmpiricalDensity histogram(const Ensemble& ensemble) {
  return histogram(ensemble.values(), freedman_diaconis_edges(ensemble.values()));
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> freedman_diaconis_edges(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("freedman_diaconis_edges: no values");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(hi > lo)) {
    return {lo - 0.5, lo + 0.5};
  }
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double n = static_cast<double>(sorted.size());
  double width = 2.0 * iqr / std::cbrt(n);
  if (!(width > 0.0)) {
    width = (hi - lo) / std::max(1.0, std::floor(std::sqrt(n)));
  }
  const auto bins = static_cast<std::size_t>(std::floor((hi - lo) / width)) + 1;
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = lo + static_cast<double>(k) * width;
  }
  return edges;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) {
    throw std::invalid_argument("uniform_edges: need bins >= 1 and hi > lo");
  }
  std::vector<double> edges(bins + 1);
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = lo + static_cast<double>(k) * w;
  }
  edges.back() = hi;
  return edges;
}

std::vector<double> lattice_edges(double center, double spacing,
                                  std::int64_t k_lo, std::int64_t k_hi) {
  if (!(spacing > 0.0) || k_hi < k_lo) {
    throw std::invalid_argument("lattice_edges: need spacing > 0 and k_hi >= k_lo");
  }
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(k_hi - k_lo + 2));
  for (std::int64_t k = k_lo; k <= k_hi + 1; ++k) {
    edges.push_back(center + (static_cast<double>(k) - 0.5) * spacing);
  }
  return edges;
}

Moments sample_moments(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("sample_moments: variance needs N >= 2");
  }
  CompensatedSum sum;
  for (double x : values) sum.add(x);
  const double n = static_cast<double>(values.size());
  const double mean = sum.value() / n;
  CompensatedSum sq;
  CompensatedSum dev;
  for (double x : values) {
    const double d = x - mean;
    sq.add(d * d);
    dev.add(d);
  }
  // Corrected two-pass formula; the second term removes residual mean error.
  const double correction = dev.value() * dev.value() / n;
  return {mean, (sq.value() - correction) / (n - 1.0)};
}

Moments sample_moments(const Ensemble& ensemble) {
  return sample_moments(ensemble.values());
}

double EffectiveProbabilities::probability(std::size_t bin) const {
  return static_cast<double>(numerators.at(bin)) /
         static_cast<double>(denominator);
}

std::uint64_t EffectiveProbabilities::numerator_sum() const {
  std::uint64_t s = 0;
  for (auto v : numerators) s += v;
  return s;
}

EffectiveProbabilities inject_realizations(const EmpiricalDensity& density,
                                           std::size_t interval,
                                           std::uint64_t n_extra) {
  if (interval < 1 || interval > density.bins()) {
    throw std::out_of_range("inject_realizations: interval must be in [1, I]");
  }
  if (n_extra > std::numeric_limits<std::uint64_t>::max() - density.n_total) {
    throw std::overflow_error("inject_realizations: total overflows");
  }
  EffectiveProbabilities p;
  p.numerators = density.counts;
  p.numerators[interval - 1] += n_extra;
  p.denominator = density.n_total + n_extra;
  return p;
}

RademacherPmf exact_pmf_rademacher(unsigned n) {
  if (n > kMaxExactRademacherSteps) {
    throw std::invalid_argument("exact_pmf_rademacher: n exceeds exact range");
  }
  RademacherPmf pmf;
  pmf.n = n;
  // Pascal's rule: one row per added sign.
  pmf.ways.assign(n + 1, 0);
  pmf.ways[0] = 1;
  for (unsigned row = 1; row <= n; ++row) {
    for (unsigned k = row; k > 0; --k) pmf.ways[k] += pmf.ways[k - 1];
  }
  return pmf;
}

}  // namespace difflab
