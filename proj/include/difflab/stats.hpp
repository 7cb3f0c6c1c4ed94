#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace difflab {

struct EmpiricalDensity;

using Cdf = std::function<double(double)>;

double normal_cdf(double x, double mean = 0.0, double stddev = 1.0);

struct Distances {
  double l1 = 0.0;
  double linf = 0.0;
};

/// l1 = sum |a_i - b_i| * width_i, linf = max |a_i - b_i| for two densities
/// on identical bins. Throws std::invalid_argument on any edge mismatch.
Distances l1_linf_distance(std::span<const double> edges_a,
                           std::span<const double> density_a,
                           std::span<const double> edges_b,
                           std::span<const double> density_b);

/// Empirical density against an analytic density already sampled on the
/// histogram's bins (one value per bin).
Distances l1_linf_distance(const EmpiricalDensity& empirical,
                           std::span<const double> analytic);

/// Bin-averaged density (F(b) - F(a)) / (b - a) for each bin.
std::vector<double> bin_average_density(std::span<const double> edges,
                                        const Cdf& cdf);

/// One-sample Kolmogorov-Smirnov statistic sup |F_N(x) - F(x)|, evaluated
/// on both sides of every jump of the empirical cdf.
double ks_statistic(std::span<const double> samples, const Cdf& cdf);

/// KS statistic for samples supported on the lattice origin + k*spacing,
/// evaluated at the cell boundaries origin + (k + 1/2)*spacing (continuity
/// correction). The plain statistic of a lattice sample against a continuous
/// cdf cannot fall below half the largest atom.
double ks_statistic_lattice(std::span<const double> samples, const Cdf& cdf,
                            double origin, double spacing);

/// Two-sample KS statistic sup |F_a(x) - F_b(x)|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic two-sample rejection threshold c * sqrt((n + m) / (n m)).
/// c = 1.95 is the 0.1% level.
double ks_two_sample_threshold(std::size_t n, std::size_t m, double c = 1.95);

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  /// Number of bins retained after pooling.
  std::size_t groups = 0;
};

/// Pearson chi-square. Bins with expected count < 5 are pooled into their
/// neighbour toward the central (largest-expectation) bin before summing.
/// dof = groups - 1 - fitted_params (clamped at 0).
ChiSquare chi_square(std::span<const double> observed,
                     std::span<const double> expected,
                     std::size_t fitted_params = 0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 1.0;
};

/// Ordinary least squares; >= 3 points, xs not all equal.
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys);

enum class Relation { Less, LessEqual, Greater, GreaterEqual };

std::string to_string(Relation r);
std::optional<Relation> relation_from_string(const std::string& s);

/// A threshold check kept as data, so the verdict can be recomputed from
/// the stored value and threshold.
struct Verdict {
  std::string name;
  double value = 0.0;
  Relation relation = Relation::Less;
  double threshold = 0.0;

  bool pass() const;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct ComparisonReport {
  std::optional<double> l1_distance;
  std::optional<double> linf_distance;
  std::optional<double> ks_statistic;
  std::optional<ChiSquare> chi_square;
  std::optional<LinearFit> fit;
  std::vector<Verdict> verdicts;

  bool all_pass() const;
  Verdict& add_verdict(std::string name, double value, Relation relation,
                       double threshold);
};

}  // namespace difflab
