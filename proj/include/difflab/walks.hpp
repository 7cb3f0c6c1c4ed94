#pragma once

// Random compositions of unit vectors in 1, 2 and 3 dimensions, Pearson's
// fixed-length planar walk, and Gaussian Brownian displacements, with
// mean-squared-displacement estimation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace difflab {

enum class WalkRule {
  RademacherPhase,   // 1D: +1 or -1
  UniformPhase2D,    // 2D: (cos t, sin t), t uniform on [0, 2 pi)
  UnitVector3D,      // 3D: uniform direction on the unit sphere
  PearsonFixedStep,  // 2D: step_length * (cos t, sin t)
  BrownianGaussian,  // 1-3D: independent N(0, sigma^2) per axis per interval tau
};

std::string to_string(WalkRule rule);

struct WalkConfig {
  int dimension = 1;
  WalkRule rule = WalkRule::RademacherPhase;
  double step_length = 1.0;
  double sigma = 1.0;
  double tau = 1.0;
  std::uint64_t n_steps = 1;
  std::size_t n_particles = 1;
  std::uint64_t seed = 0;
  /// Steps at which the MSD curve is sampled. Empty selects ten equally
  /// spaced steps ending at n_steps (or every step when n_steps < 10).
  std::vector<std::uint64_t> checkpoints;
  /// Retain full per-particle paths. Otherwise only final positions are
  /// kept and memory stays O(n_particles).
  bool keep_trajectories = false;

  /// Throws std::invalid_argument on a rule/dimension mismatch or
  /// non-positive parameters.
  void validate() const;
};

struct Trajectory {
  std::size_t particle_id = 0;
  int dimension = 1;
  /// (n_steps + 1) points, dimension coordinates each; point 0 is the origin.
  std::vector<double> positions;

  std::size_t points() const noexcept {
    return positions.size() / static_cast<std::size_t>(dimension);
  }
  std::span<const double> point(std::size_t k) const {
    return std::span<const double>(positions).subspan(
        k * static_cast<std::size_t>(dimension),
        static_cast<std::size_t>(dimension));
  }
};

/*
 * Mean-squared displacement sampled at a few checkpoints.
 *
 * When produced by a walk engine, the curve also carries the ensemble
 * standard error of its least-squares slope: the OLS slope is linear in the
 * data, so it equals the particle average of per-particle slopes, whose
 * spread gives an error bar that accounts for correlation along each path.
 */
struct MsdCurve {
  int dimension = 1;
  /// Step counts or physical times (k * tau), strictly increasing.
  std::vector<double> times;
  /// msd_axis[c][a]: mean of x_a^2 at checkpoint c.
  std::vector<std::array<double, 3>> msd_axis;
  /// mean_axis[c][a]: mean of x_a at checkpoint c (engine output only).
  std::vector<std::array<double, 3>> mean_axis;
  std::size_t particles = 0;
  std::array<double, 3> slope_stderr_axis{};
  double slope_stderr_total = 0.0;

  std::vector<double> total() const;
  std::vector<double> axis(int a) const;
};

struct WalkResult {
  int dimension = 1;
  std::uint64_t n_steps = 0;
  /// Physical duration of one step (tau for Brownian walks, 1 otherwise).
  double step_duration = 1.0;
  /// Particle-major final positions, `dimension` coordinates per particle.
  std::vector<double> final_positions;
  MsdCurve curve;
  std::vector<Trajectory> trajectories;

  std::size_t particles() const noexcept {
    return final_positions.size() / static_cast<std::size_t>(dimension);
  }
  std::span<const double> position(std::size_t particle) const {
    return std::span<const double>(final_positions)
        .subspan(particle * static_cast<std::size_t>(dimension),
                 static_cast<std::size_t>(dimension));
  }
  /// Final positions along one axis.
  std::vector<double> axis(int a) const;
};

/// Sums of n unit-magnitude random elements. rule must be RademacherPhase,
/// UniformPhase2D or UnitVector3D.
WalkResult rayleigh_walk(const WalkConfig& config);

struct PearsonResult {
  /// Distance from the origin after n stretches, one per particle.
  std::vector<double> radii;
  WalkResult walk;
};

PearsonResult pearson_walk(const WalkConfig& config);

/// Gaussian displacement walk sampled every tau up to floor(total_time/tau)
/// intervals. config.n_steps is ignored. Throws when total_time < tau.
WalkResult brownian_walk(const WalkConfig& config, double total_time);

struct MsdFit {
  int dimension = 1;
  /// slope_a / 2 for each axis.
  std::array<double, 3> d_axis{};
  /// Total-MSD slope.
  double slope_total = 0.0;
  /// slope_total / (2 * dimension), the isotropic coefficient.
  double d_total = 0.0;
  /// Standard error on d_axis / d_total; ensemble-based when the curve
  /// carries it, OLS residual based otherwise.
  std::array<double, 3> d_axis_stderr{};
  double d_total_stderr = 0.0;
  /// Coefficient of determination of the total-MSD fit.
  double r_squared = 1.0;
};

/// Least-squares MSD slope per axis and in total. Needs >= 3 checkpoints
/// with distinct times.
MsdFit msd_fit(const MsdCurve& curve);

/// Convenience for a single-axis curve given directly.
MsdFit msd_fit(std::span<const double> times, std::span<const double> msd);

/// Per-axis moments of a cloud of positions, with standard errors used for
/// isotropy checks.
struct AxisStatistics {
  int dimension = 1;
  std::size_t samples = 0;
  std::array<double, 3> mean{};
  std::array<double, 3> variance{};
  std::array<double, 3> variance_stderr{};
  std::array<std::array<double, 3>, 3> covariance{};
  std::array<std::array<double, 3>, 3> covariance_stderr{};

  /// max over axis pairs of |var_a - var_b| / sqrt(se_a^2 + se_b^2).
  double max_variance_z() const;
  /// max over axis pairs of |cov_ab| / se(cov_ab).
  double max_covariance_z() const;
};

AxisStatistics axis_statistics(std::span<const double> positions,
                               int dimension);

}  // namespace difflab
