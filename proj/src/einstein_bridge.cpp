#include "difflab/einstein_bridge.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace difflab {

namespace {

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void PhysicalConstants::validate() const {
  if (!positive(gas_constant.value) || !positive(avogadro.value) ||
      !positive(viscosity.value) || !positive(temperature.value) ||
      !positive(particle_radius.value)) {
    throw std::invalid_argument("PhysicalConstants: all fields must be > 0");
  }
}

BrownianScales::BrownianScales(units::Area sigma_sq_, units::Time tau_)
    : sigma_sq(sigma_sq_), tau(tau_) {
  if (!positive(sigma_sq.value) || !positive(tau.value)) {
    throw std::invalid_argument("BrownianScales: sigma^2 and tau must be > 0");
  }
}

units::Diffusivity d_stochastic(const BrownianScales& scales) {
  return scales.sigma_sq / (2.0 * scales.tau);
}

units::Area reduce_to_laplace(units::Diffusivity d_st, units::Time tau) {
  if (!positive(d_st.value) || !positive(tau.value)) {
    throw std::invalid_argument("reduce_to_laplace: inputs must be > 0");
  }
  return d_st * tau;
}

units::Time elapsed_time(std::uint64_t n, units::Time tau) {
  return tau * static_cast<double>(n);
}

BrownianScales scales_for(units::Diffusivity d, units::Time tau) {
  return BrownianScales(2.0 * d * tau, tau);
}

units::Diffusivity d_macroscopic(const PhysicalConstants& c) {
  c.validate();
  const units::Diffusivity d =
      c.gas_constant * c.temperature /
      (6.0 * std::numbers::pi * c.avogadro * c.viscosity * c.particle_radius);
  return d;
}

units::PerMole estimate_avogadro(units::Diffusivity d_observed,
                                 const PhysicalConstants& c) {
  if (!positive(d_observed.value)) {
    throw std::invalid_argument("estimate_avogadro: diffusivity must be > 0");
  }
  PhysicalConstants probe = c;
  probe.avogadro = units::PerMole{1.0};
  probe.validate();
  const units::PerMole n =
      c.gas_constant * c.temperature /
      (6.0 * std::numbers::pi * d_observed * c.viscosity * c.particle_radius);
  return n;
}

}  // namespace difflab
