#pragma once

// Brownian diffusion coefficients: the stochastic one built from the
// per-interval displacement variance, its reduction to a per-step
// coefficient, and the macroscopic Stokes-Einstein coefficient for spheres
// in a viscous fluid.

#include <cstdint>

#include "difflab/units.hpp"

namespace difflab {

namespace codata {
inline constexpr double kGasConstant = 8.314462618;     // J mol^-1 K^-1
inline constexpr double kAvogadro = 6.02214076e23;      // mol^-1
}  // namespace codata

struct PhysicalConstants {
  units::MolarGasConstant gas_constant{codata::kGasConstant};
  units::PerMole avogadro{codata::kAvogadro};
  /// Water at 17 C.
  units::Viscosity viscosity{1.08e-3};
  units::Temperature temperature{290.15};
  /// Sphere of 1 micron diameter.
  units::Length particle_radius{0.5e-6};

  /// Throws std::invalid_argument unless every field is > 0 and finite.
  void validate() const;
};

struct BrownianScales {
  /// Displacement variance per interval, per axis.
  units::Area sigma_sq;
  /// Interval short against the observation time but long enough that
  /// successive displacements are independent.
  units::Time tau;

  BrownianScales(units::Area sigma_sq, units::Time tau);
};

/// sigma^2 / (2 tau)
units::Diffusivity d_stochastic(const BrownianScales& scales);

/// tau * D_st: the per-step coefficient of the step-count equation, equal
/// to sigma^2 / 2.
units::Area reduce_to_laplace(units::Diffusivity d_st, units::Time tau);

/// t = n tau
units::Time elapsed_time(std::uint64_t n, units::Time tau);

/// Scales giving a target diffusivity at interval tau: sigma^2 = 2 D tau.
BrownianScales scales_for(units::Diffusivity d, units::Time tau);

/// Stokes-Einstein: R T / (6 pi N_Avo mu r).
units::Diffusivity d_macroscopic(const PhysicalConstants& constants);

/// Inverts Stokes-Einstein for N_Avo given an observed diffusivity.
/// constants.avogadro is not read.
units::PerMole estimate_avogadro(units::Diffusivity d_observed,
                                 const PhysicalConstants& constants);

}  // namespace difflab
