#include "difflab/walks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "difflab/parallel.hpp"
#include "difflab/rng.hpp"
#include "difflab/stats.hpp"

namespace difflab {

std::string to_string(WalkRule rule) {
  switch (rule) {
    case WalkRule::RademacherPhase: return "rademacher-phase";
    case WalkRule::UniformPhase2D: return "uniform-phase-2d";
    case WalkRule::UnitVector3D: return "unit-vector-3d";
    case WalkRule::PearsonFixedStep: return "pearson-fixed-step";
    case WalkRule::BrownianGaussian: return "brownian-gaussian";
  }
  return {};
}

void WalkConfig::validate() const {
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("walk: dimension must be 1, 2 or 3");
  }
  const bool matches = [&] {
    switch (rule) {
      case WalkRule::RademacherPhase: return dimension == 1;
      case WalkRule::UniformPhase2D: return dimension == 2;
      case WalkRule::UnitVector3D: return dimension == 3;
      case WalkRule::PearsonFixedStep: return dimension == 2;
      case WalkRule::BrownianGaussian: return true;
    }
    return false;
  }();
  if (!matches) {
    throw std::invalid_argument("walk: rule " + to_string(rule) +
                                " does not match dimension " +
                                std::to_string(dimension));
  }
  if (n_particles == 0) {
    throw std::invalid_argument("walk: n_particles must be >= 1");
  }
  // Brownian walks derive the step count from the elapsed time.
  if (rule != WalkRule::BrownianGaussian && n_steps == 0) {
    throw std::invalid_argument("walk: n_steps must be >= 1");
  }
  if (rule == WalkRule::PearsonFixedStep &&
      !(step_length > 0.0 && std::isfinite(step_length))) {
    throw std::invalid_argument("walk: step length must be > 0");
  }
  if (rule == WalkRule::BrownianGaussian &&
      !(sigma > 0.0 && std::isfinite(sigma) && tau > 0.0 && std::isfinite(tau))) {
    throw std::invalid_argument("walk: sigma and tau must be > 0");
  }
}

std::vector<double> MsdCurve::total() const {
  std::vector<double> out(msd_axis.size());
  for (std::size_t c = 0; c < msd_axis.size(); ++c) {
    double s = 0.0;
    for (int a = 0; a < dimension; ++a) s += msd_axis[c][static_cast<std::size_t>(a)];
    out[c] = s;
  }
  return out;
}

std::vector<double> MsdCurve::axis(int a) const {
  std::vector<double> out(msd_axis.size());
  for (std::size_t c = 0; c < msd_axis.size(); ++c) {
    out[c] = msd_axis[c][static_cast<std::size_t>(a)];
  }
  return out;
}

std::vector<double> WalkResult::axis(int a) const {
  const std::size_t d = static_cast<std::size_t>(dimension);
  std::vector<double> out(particles());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = final_positions[i * d + static_cast<std::size_t>(a)];
  }
  return out;
}

namespace {

std::vector<std::uint64_t> resolve_checkpoints(
    const std::vector<std::uint64_t>& requested, std::uint64_t n_steps) {
  std::vector<std::uint64_t> cps;
  if (requested.empty()) {
    if (n_steps < 10) {
      for (std::uint64_t k = 1; k <= n_steps; ++k) cps.push_back(k);
    } else {
      for (std::uint64_t k = 1; k <= 10; ++k) {
        const std::uint64_t c = (k * n_steps + 5) / 10;
        if (cps.empty() || c > cps.back()) cps.push_back(c);
      }
    }
    return cps;
  }
  for (std::size_t i = 0; i < requested.size(); ++i) {
    if (requested[i] == 0 || requested[i] > n_steps ||
        (i > 0 && requested[i] <= requested[i - 1])) {
      throw std::invalid_argument(
          "walk: checkpoints must be strictly increasing within [1, n_steps]");
    }
  }
  return requested;
}

struct BlockPartial {
  std::vector<std::array<double, 3>> msd;
  std::vector<std::array<double, 3>> mean;
  std::array<double, 3> slope_sum{};
  std::array<double, 3> slope_sq{};
  double slope_total_sum = 0.0;
  double slope_total_sq = 0.0;
};

/// Drives every particle through n_steps increments produced by
/// step(stream, increment). Increment s of particle i comes from
/// CounterStream(seed, i, s).
template <class StepFn>
WalkResult run_walk(const WalkConfig& cfg, std::uint64_t n_steps,
                    double step_duration, StepFn step) {
  const int dim = cfg.dimension;
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n_particles = cfg.n_particles;
  const auto checkpoints = resolve_checkpoints(cfg.checkpoints, n_steps);
  const std::size_t n_cp = checkpoints.size();

  WalkResult result;
  result.dimension = dim;
  result.n_steps = n_steps;
  result.step_duration = step_duration;
  result.final_positions.assign(n_particles * d, 0.0);
  if (cfg.keep_trajectories) {
    result.trajectories.resize(n_particles);
    for (std::size_t i = 0; i < n_particles; ++i) {
      result.trajectories[i].particle_id = i;
      result.trajectories[i].dimension = dim;
      result.trajectories[i].positions.assign((n_steps + 1) * d, 0.0);
    }
  }

  std::vector<double> times(n_cp);
  for (std::size_t c = 0; c < n_cp; ++c) {
    times[c] = static_cast<double>(checkpoints[c]) * step_duration;
  }
  // OLS weights: slope = sum_c w_c * y_c.
  std::vector<double> weights(n_cp, 0.0);
  if (n_cp >= 2) {
    double mean_t = 0.0;
    for (double t : times) mean_t += t;
    mean_t /= static_cast<double>(n_cp);
    double sxx = 0.0;
    for (double t : times) sxx += (t - mean_t) * (t - mean_t);
    for (std::size_t c = 0; c < n_cp; ++c) weights[c] = (times[c] - mean_t) / sxx;
  }

  std::vector<BlockPartial> partials(block_count(n_particles));
  parallel_blocks(n_particles, [&](std::size_t block, std::size_t begin,
                                   std::size_t end) {
    BlockPartial& part = partials[block];
    part.msd.assign(n_cp, {0.0, 0.0, 0.0});
    part.mean.assign(n_cp, {0.0, 0.0, 0.0});
    std::array<double, 3> x{};
    std::array<double, 3> inc{};
    for (std::size_t i = begin; i < end; ++i) {
      x = {0.0, 0.0, 0.0};
      std::array<double, 3> slope{};
      double* path = cfg.keep_trajectories
                         ? result.trajectories[i].positions.data()
                         : nullptr;
      std::size_t next_cp = 0;
      for (std::uint64_t s = 1; s <= n_steps; ++s) {
        CounterStream stream(cfg.seed, i, s);
        step(stream, inc.data());
        for (std::size_t a = 0; a < d; ++a) x[a] += inc[a];
        if (path != nullptr) {
          for (std::size_t a = 0; a < d; ++a) path[s * d + a] = x[a];
        }
        if (next_cp < n_cp && checkpoints[next_cp] == s) {
          for (std::size_t a = 0; a < d; ++a) {
            const double sq = x[a] * x[a];
            part.msd[next_cp][a] += sq;
            part.mean[next_cp][a] += x[a];
            slope[a] += weights[next_cp] * sq;
          }
          ++next_cp;
        }
      }
      double slope_total = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        part.slope_sum[a] += slope[a];
        part.slope_sq[a] += slope[a] * slope[a];
        slope_total += slope[a];
        result.final_positions[i * d + a] = x[a];
      }
      part.slope_total_sum += slope_total;
      part.slope_total_sq += slope_total * slope_total;
    }
  });

  // Reduce in block order.
  std::vector<std::array<CompensatedSum, 3>> msd(n_cp);
  std::vector<std::array<CompensatedSum, 3>> mean(n_cp);
  std::array<CompensatedSum, 3> slope_sum;
  std::array<CompensatedSum, 3> slope_sq;
  CompensatedSum slope_total_sum;
  CompensatedSum slope_total_sq;
  for (const auto& part : partials) {
    for (std::size_t c = 0; c < n_cp; ++c) {
      for (std::size_t a = 0; a < d; ++a) {
        msd[c][a].add(part.msd[c][a]);
        mean[c][a].add(part.mean[c][a]);
      }
    }
    for (std::size_t a = 0; a < d; ++a) {
      slope_sum[a].add(part.slope_sum[a]);
      slope_sq[a].add(part.slope_sq[a]);
    }
    slope_total_sum.add(part.slope_total_sum);
    slope_total_sq.add(part.slope_total_sq);
  }

  const double n = static_cast<double>(n_particles);
  auto stderr_of = [n](double sum, double sq) {
    if (n < 2.0) return 0.0;
    const double mean = sum / n;
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
  };

  MsdCurve& curve = result.curve;
  curve.dimension = dim;
  curve.times = times;
  curve.particles = n_particles;
  curve.msd_axis.assign(n_cp, {0.0, 0.0, 0.0});
  curve.mean_axis.assign(n_cp, {0.0, 0.0, 0.0});
  for (std::size_t c = 0; c < n_cp; ++c) {
    for (std::size_t a = 0; a < d; ++a) {
      curve.msd_axis[c][a] = msd[c][a].value() / n;
      curve.mean_axis[c][a] = mean[c][a].value() / n;
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    curve.slope_stderr_axis[a] = stderr_of(slope_sum[a].value(), slope_sq[a].value());
  }
  curve.slope_stderr_total =
      stderr_of(slope_total_sum.value(), slope_total_sq.value());
  return result;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

WalkResult rayleigh_walk(const WalkConfig& config) {
  config.validate();
  switch (config.rule) {
    case WalkRule::RademacherPhase:
      return run_walk(config, config.n_steps, 1.0,
                      [](CounterStream& s, double* inc) {
                        inc[0] = (s() >> 63) ? 1.0 : -1.0;
                      });
    case WalkRule::UniformPhase2D:
      return run_walk(config, config.n_steps, 1.0,
                      [](CounterStream& s, double* inc) {
                        const double theta = kTwoPi * s.uniform();
                        inc[0] = std::cos(theta);
                        inc[1] = std::sin(theta);
                      });
    case WalkRule::UnitVector3D:
      // z uniform on [-1, 1] and azimuth uniform: exact, rejection-free.
      return run_walk(config, config.n_steps, 1.0,
                      [](CounterStream& s, double* inc) {
                        const double z = 2.0 * s.uniform() - 1.0;
                        const double phi = kTwoPi * s.uniform();
                        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                        inc[0] = rho * std::cos(phi);
                        inc[1] = rho * std::sin(phi);
                        inc[2] = z;
                      });
    default:
      throw std::invalid_argument("rayleigh_walk: rule " +
                                  to_string(config.rule) +
                                  " is not a unit-element composition");
  }
}

PearsonResult pearson_walk(const WalkConfig& config) {
  config.validate();
  if (config.rule != WalkRule::PearsonFixedStep) {
    throw std::invalid_argument("pearson_walk: rule must be pearson-fixed-step");
  }
  const double ell = config.step_length;
  PearsonResult out;
  out.walk = run_walk(config, config.n_steps, 1.0,
                      [ell](CounterStream& s, double* inc) {
                        const double theta = kTwoPi * s.uniform();
                        inc[0] = ell * std::cos(theta);
                        inc[1] = ell * std::sin(theta);
                      });
  out.radii.resize(out.walk.particles());
  for (std::size_t i = 0; i < out.radii.size(); ++i) {
    const auto p = out.walk.position(i);
    out.radii[i] = std::hypot(p[0], p[1]);
  }
  return out;
}

WalkResult brownian_walk(const WalkConfig& config, double total_time) {
  config.validate();
  if (config.rule != WalkRule::BrownianGaussian) {
    throw std::invalid_argument("brownian_walk: rule must be brownian-gaussian");
  }
  if (!(total_time >= config.tau) || !std::isfinite(total_time)) {
    throw std::invalid_argument("brownian_walk: total_time must be >= tau");
  }
  // Tolerate t = k * tau carrying a rounding error in the last place.
  const auto n_steps = static_cast<std::uint64_t>(
      std::floor(total_time / config.tau * (1.0 + 1e-12)));
  const double sigma = config.sigma;
  const auto d = static_cast<std::size_t>(config.dimension);
  return run_walk(config, n_steps, config.tau,
                  [sigma, d](CounterStream& s, double* inc) {
                    for (std::size_t a = 0; a < d; ++a) inc[a] = sigma * s.normal();
                  });
}

MsdFit msd_fit(const MsdCurve& curve) {
  if (curve.times.size() < 3 || curve.msd_axis.size() != curve.times.size()) {
    throw std::invalid_argument("msd_fit: need at least 3 sample points");
  }
  if (curve.dimension < 1 || curve.dimension > 3) {
    throw std::invalid_argument("msd_fit: dimension must be 1, 2 or 3");
  }
  MsdFit fit;
  fit.dimension = curve.dimension;
  for (int a = 0; a < curve.dimension; ++a) {
    const auto ys = curve.axis(a);
    const LinearFit lf = fit_linear(curve.times, ys);
    const auto ua = static_cast<std::size_t>(a);
    fit.d_axis[ua] = lf.slope / 2.0;
    fit.d_axis_stderr[ua] = (curve.particles > 1 ? curve.slope_stderr_axis[ua]
                                                 : lf.slope_stderr) /
                            2.0;
  }
  const LinearFit total = fit_linear(curve.times, curve.total());
  const double two_d = 2.0 * static_cast<double>(curve.dimension);
  fit.slope_total = total.slope;
  fit.d_total = total.slope / two_d;
  fit.d_total_stderr =
      (curve.particles > 1 ? curve.slope_stderr_total : total.slope_stderr) /
      two_d;
  fit.r_squared = total.r_squared;
  return fit;
}

MsdFit msd_fit(std::span<const double> times, std::span<const double> msd) {
  if (times.size() != msd.size()) {
    throw std::invalid_argument("msd_fit: times and msd differ in length");
  }
  MsdCurve curve;
  curve.dimension = 1;
  curve.times.assign(times.begin(), times.end());
  curve.msd_axis.resize(msd.size());
  for (std::size_t c = 0; c < msd.size(); ++c) curve.msd_axis[c] = {msd[c], 0.0, 0.0};
  return msd_fit(curve);
}

double AxisStatistics::max_variance_z() const {
  double z = 0.0;
  for (int a = 0; a < dimension; ++a) {
    for (int b = a + 1; b < dimension; ++b) {
      const auto ua = static_cast<std::size_t>(a);
      const auto ub = static_cast<std::size_t>(b);
      const double se = std::hypot(variance_stderr[ua], variance_stderr[ub]);
      z = std::max(z, std::abs(variance[ua] - variance[ub]) / se);
    }
  }
  return z;
}

double AxisStatistics::max_covariance_z() const {
  double z = 0.0;
  for (std::size_t a = 0; a < static_cast<std::size_t>(dimension); ++a) {
    for (std::size_t b = a + 1; b < static_cast<std::size_t>(dimension); ++b) {
      z = std::max(z, std::abs(covariance[a][b]) / covariance_stderr[a][b]);
    }
  }
  return z;
}

AxisStatistics axis_statistics(std::span<const double> positions,
                               int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("axis_statistics: dimension must be 1, 2 or 3");
  }
  const auto d = static_cast<std::size_t>(dimension);
  if (positions.size() % d != 0 || positions.size() / d < 2) {
    throw std::invalid_argument("axis_statistics: need at least 2 points");
  }
  const std::size_t n = positions.size() / d;
  const double dn = static_cast<double>(n);
  AxisStatistics st;
  st.dimension = dimension;
  st.samples = n;

  std::array<CompensatedSum, 3> sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) sum[a].add(positions[i * d + a]);
  }
  for (std::size_t a = 0; a < d; ++a) st.mean[a] = sum[a].value() / dn;

  std::array<CompensatedSum, 3> m2;
  std::array<CompensatedSum, 3> m4;
  std::array<std::array<CompensatedSum, 3>, 3> c1;
  std::array<std::array<CompensatedSum, 3>, 3> c2;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> dev{};
    for (std::size_t a = 0; a < d; ++a) dev[a] = positions[i * d + a] - st.mean[a];
    for (std::size_t a = 0; a < d; ++a) {
      const double sq = dev[a] * dev[a];
      m2[a].add(sq);
      m4[a].add(sq * sq);
      for (std::size_t b = a + 1; b < d; ++b) {
        const double p = dev[a] * dev[b];
        c1[a][b].add(p);
        c2[a][b].add(p * p);
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    st.variance[a] = m2[a].value() / (dn - 1.0);
    const double mu2 = m2[a].value() / dn;
    const double mu4 = m4[a].value() / dn;
    st.variance_stderr[a] = std::sqrt(std::max(0.0, mu4 - mu2 * mu2) / dn);
    st.covariance[a][a] = st.variance[a];
    st.covariance_stderr[a][a] = st.variance_stderr[a];
    for (std::size_t b = a + 1; b < d; ++b) {
      const double mean_p = c1[a][b].value() / dn;
      const double var_p = c2[a][b].value() / dn - mean_p * mean_p;
      st.covariance[a][b] = st.covariance[b][a] = c1[a][b].value() / (dn - 1.0);
      st.covariance_stderr[a][b] = st.covariance_stderr[b][a] =
          std::sqrt(std::max(0.0, var_p) / dn);
    }
  }
  return st;
}

}  // namespace difflab
