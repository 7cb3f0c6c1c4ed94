#include "difflab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "difflab/ensembles.hpp"
#include "difflab/parallel.hpp"

namespace difflab {

double normal_cdf(double x, double mean, double stddev) {
  return 0.5 * std::erfc(-(x - mean) / (stddev * std::numbers::sqrt2));
}

Distances l1_linf_distance(std::span<const double> edges_a,
                           std::span<const double> density_a,
                           std::span<const double> edges_b,
                           std::span<const double> density_b) {
  if (edges_a.size() != edges_b.size() ||
      !std::equal(edges_a.begin(), edges_a.end(), edges_b.begin())) {
    throw std::invalid_argument("l1_linf_distance: bin edges differ");
  }
  validate_edges(edges_a);
  const std::size_t bins = edges_a.size() - 1;
  if (density_a.size() != bins || density_b.size() != bins) {
    throw std::invalid_argument("l1_linf_distance: one density value per bin required");
  }
  Distances d;
  CompensatedSum l1;
  for (std::size_t i = 0; i < bins; ++i) {
    const double diff = std::abs(density_a[i] - density_b[i]);
    l1.add(diff * (edges_a[i + 1] - edges_a[i]));
    d.linf = std::max(d.linf, diff);
  }
  d.l1 = l1.value();
  return d;
}

Distances l1_linf_distance(const EmpiricalDensity& empirical,
                           std::span<const double> analytic) {
  const auto dens = empirical.densities();
  return l1_linf_distance(empirical.edges, dens, empirical.edges, analytic);
}

std::vector<double> bin_average_density(std::span<const double> edges,
                                        const Cdf& cdf) {
  validate_edges(edges);
  std::vector<double> out(edges.size() - 1);
  double lower = cdf(edges[0]);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double upper = cdf(edges[i + 1]);
    out[i] = (upper - lower) / (edges[i + 1] - edges[i]);
    lower = upper;
  }
  return out;
}

double ks_statistic(std::span<const double> samples, const Cdf& cdf) {
  if (samples.empty()) {
    throw std::invalid_argument("ks_statistic: no samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

double ks_statistic_lattice(std::span<const double> samples, const Cdf& cdf,
                            double origin, double spacing) {
  if (samples.empty()) {
    throw std::invalid_argument("ks_statistic_lattice: no samples");
  }
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("ks_statistic_lattice: spacing must be > 0");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto cell = [&](double x) {
    return static_cast<std::int64_t>(std::llround((x - origin) / spacing));
  };
  const std::int64_t k_lo = cell(sorted.front()) - 1;
  const std::int64_t k_hi = cell(sorted.back());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t below = 0;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    const double boundary = origin + (static_cast<double>(k) + 0.5) * spacing;
    while (below < sorted.size() && sorted[below] < boundary) ++below;
    d = std::max(d, std::abs(static_cast<double>(below) / n - cdf(boundary)));
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample: both samples must be non-empty");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_threshold(std::size_t n, std::size_t m, double c) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

ChiSquare chi_square(std::span<const double> observed,
                     std::span<const double> expected,
                     std::size_t fitted_params) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw std::invalid_argument("chi_square: observed/expected size mismatch");
  }
  double total_expected = 0.0;
  for (double e : expected) {
    if (!(e >= 0.0)) {
      throw std::invalid_argument("chi_square: expected counts must be >= 0");
    }
    total_expected += e;
  }
  if (!(total_expected > 0.0)) {
    throw std::invalid_argument("chi_square: all expected counts are zero");
  }

  constexpr double kMinExpected = 5.0;
  struct Group {
    double o = 0.0;
    double e = 0.0;
  };
  const std::size_t center = static_cast<std::size_t>(
      std::max_element(expected.begin(), expected.end()) - expected.begin());

  std::vector<Group> left;
  std::vector<Group> right;
  Group mid{observed[center], expected[center]};
  Group acc;
  for (std::size_t i = 0; i < center; ++i) {
    acc.o += observed[i];
    acc.e += expected[i];
    if (acc.e >= kMinExpected) {
      left.push_back(acc);
      acc = {};
    }
  }
  mid.o += acc.o;
  mid.e += acc.e;
  acc = {};
  for (std::size_t i = expected.size() - 1; i > center; --i) {
    acc.o += observed[i];
    acc.e += expected[i];
    if (acc.e >= kMinExpected) {
      right.push_back(acc);
      acc = {};
    }
  }
  mid.o += acc.o;
  mid.e += acc.e;
  if (mid.e < kMinExpected) {
    if (!left.empty()) {
      mid.o += left.back().o;
      mid.e += left.back().e;
      left.pop_back();
    } else if (!right.empty()) {
      mid.o += right.back().o;
      mid.e += right.back().e;
      right.pop_back();
    }
  }

  ChiSquare result;
  auto add = [&](const Group& g) {
    const double diff = g.o - g.e;
    result.statistic += diff * diff / g.e;
    ++result.groups;
  };
  for (const auto& g : left) add(g);
  add(mid);
  for (auto it = right.rbegin(); it != right.rend(); ++it) add(*it);
  result.dof = result.groups > 1 + fitted_params
                   ? result.groups - 1 - fitted_params
                   : 0;
  return result;
}

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("fit_linear: xs and ys differ in length");
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("fit_linear: need at least 3 points");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("fit_linear: xs are all equal");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += r * r;
  }
  const double s2 = sse / (n - 2.0);
  fit.slope_stderr = std::sqrt(s2 / sxx);
  fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::Less: return "<";
    case Relation::LessEqual: return "<=";
    case Relation::Greater: return ">";
    case Relation::GreaterEqual: return ">=";
  }
  return {};
}

std::optional<Relation> relation_from_string(const std::string& s) {
  if (s == "<") return Relation::Less;
  if (s == "<=") return Relation::LessEqual;
  if (s == ">") return Relation::Greater;
  if (s == ">=") return Relation::GreaterEqual;
  return std::nullopt;
}

bool Verdict::pass() const {
  switch (relation) {
    case Relation::Less: return value < threshold;
    case Relation::LessEqual: return value <= threshold;
    case Relation::Greater: return value > threshold;
    case Relation::GreaterEqual: return value >= threshold;
  }
  return false;
}

bool ComparisonReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict& v) { return v.pass(); });
}

Verdict& ComparisonReport::add_verdict(std::string name, double value,
                                       Relation relation, double threshold) {
  verdicts.push_back({std::move(name), value, relation, threshold});
  return verdicts.back();
}

}  // namespace difflab
