#include "difflab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "difflab/parallel.hpp"

namespace difflab {

ThermalMedium::ThermalMedium(double conductivity, double density,
                             double specific_heat)
    : k_(conductivity), rho_(density), c_(specific_heat) {
  if (!(k_ > 0.0) || !(rho_ > 0.0) || !(c_ > 0.0) || !std::isfinite(k_) ||
      !std::isfinite(rho_) || !std::isfinite(c_)) {
    throw std::invalid_argument(
        "ThermalMedium: conductivity, density and specific heat must be > 0");
  }
}

ThermalMedium ThermalMedium::probability_mode(double diffusivity) {
  return ThermalMedium(diffusivity, 1.0, 1.0);
}

void Field1D::validate() const {
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw std::invalid_argument("Field1D: dx must be > 0");
  }
  if (!(diffusivity > 0.0) || !std::isfinite(diffusivity)) {
    throw std::invalid_argument("Field1D: diffusivity must be > 0");
  }
  if (values.size() < 2) {
    throw std::invalid_argument("Field1D: need at least 2 cells");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("Field1D: non-finite value");
  }
}

Field1D make_field(double lo, double hi, std::size_t cells, double diffusivity,
                   const std::function<double(double)>& profile) {
  if (!(hi > lo) || cells < 2) {
    throw std::invalid_argument("make_field: need hi > lo and >= 2 cells");
  }
  Field1D f;
  f.dx = (hi - lo) / static_cast<double>(cells);
  f.x0 = lo + 0.5 * f.dx;
  f.diffusivity = diffusivity;
  f.values.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) f.values[i] = profile(f.x(i));
  f.validate();
  return f;
}

Field1D point_source(double dx, std::size_t half_cells, double diffusivity,
                     double content) {
  Field1D f;
  f.dx = dx;
  f.x0 = -static_cast<double>(half_cells) * dx;
  f.diffusivity = diffusivity;
  f.values.assign(2 * half_cells + 1, 0.0);
  f.values[half_cells] = content / dx;
  f.validate();
  return f;
}

Field1D sine_profile(double length, std::size_t cells, double diffusivity) {
  return make_field(0.0, length, cells, diffusivity, [length](double x) {
    return std::sin(std::numbers::pi * x / length);
  });
}

Field1D step_profile(double length, std::size_t cells, double diffusivity) {
  return make_field(0.0, length, cells, diffusivity,
                    [length](double x) { return x < 0.5 * length ? 1.0 : 0.0; });
}

StabilityError::StabilityError(double lambda)
    : std::runtime_error("FTCS step unstable: eta*dt/dx^2 = " +
                         std::to_string(lambda) + " exceeds 1/2"),
      lambda_(lambda) {}

double green_function(double x, double t, double diffusivity, double content) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("green_function: t must be > 0");
  }
  if (!(diffusivity > 0.0)) {
    throw std::invalid_argument("green_function: diffusivity must be > 0");
  }
  const double four_dt = 4.0 * diffusivity * t;
  return content / std::sqrt(std::numbers::pi * four_dt) *
         std::exp(-x * x / four_dt);
}

double green_cdf(double x, double t, double diffusivity, double content) {
  if (!(t > 0.0) || !(diffusivity > 0.0)) {
    throw std::invalid_argument("green_cdf: t and diffusivity must be > 0");
  }
  return content * 0.5 * std::erfc(-x / std::sqrt(4.0 * diffusivity * t));
}

double heat_content(const Field1D& field, const ThermalMedium& medium) {
  return medium.volumetric_heat_capacity() * heat_content(field);
}

double heat_content(const Field1D& field) {
  CompensatedSum s;
  for (double v : field.values) s.add(v);
  return s.value() * field.dx;
}

namespace {

double ghost(const BoundarySide& side, double inner) {
  switch (side.kind) {
    case BoundarySide::Kind::Reflecting: return inner;
    case BoundarySide::Kind::Dirichlet: return 2.0 * side.value - inner;
    case BoundarySide::Kind::Absorbing: return -inner;
  }
  return inner;
}

/// In-place update in flux form so reflecting ends conserve the cell sum to
/// rounding.
void step_in_place(Field1D& field, std::vector<double>& scratch, double dt,
                   const BoundaryCondition& bc) {
  const double lambda = field.diffusivity * dt / (field.dx * field.dx);
  if (!(lambda <= kMaxStableLambda)) throw StabilityError(lambda);
  if (!(dt > 0.0)) throw std::invalid_argument("ftcs_step: dt must be > 0");

  auto& v = field.values;
  const std::size_t n = v.size();
  // scratch[i] = flux across face i - 1/2, i = 0..n.
  scratch.resize(n + 1);
  scratch[0] = lambda * (v[0] - ghost(bc.left, v[0]));
  for (std::size_t i = 1; i < n; ++i) scratch[i] = lambda * (v[i] - v[i - 1]);
  scratch[n] = lambda * (ghost(bc.right, v[n - 1]) - v[n - 1]);
  for (std::size_t i = 0; i < n; ++i) v[i] += scratch[i + 1] - scratch[i];
  field.outflow += (scratch[0] - scratch[n]) * field.dx;
}

}  // namespace

Field1D ftcs_step(const Field1D& field, double dt, const BoundaryCondition& bc) {
  field.validate();
  Field1D next = field;
  std::vector<double> scratch;
  step_in_place(next, scratch, dt, bc);
  next.time = field.time + dt;
  return next;
}

Field1D solve(Field1D field, double t_end, const BoundaryCondition& bc,
              double lambda) {
  field.validate();
  if (!(t_end >= field.time)) {
    throw std::invalid_argument("solve: t_end precedes the field's time");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("solve: lambda must be > 0");
  }
  const double dt = lambda * field.dx * field.dx / field.diffusivity;
  const double t0 = field.time;
  const double span = t_end - t0;
  auto full = static_cast<std::uint64_t>(std::floor(span / dt));
  // A remainder below this is rounding noise, not a step.
  const double tiny = 1e-9 * dt;
  if (full > 0 && span - static_cast<double>(full) * dt < -tiny) --full;

  std::vector<double> scratch;
  for (std::uint64_t k = 0; k < full; ++k) step_in_place(field, scratch, dt, bc);
  const double rest = span - static_cast<double>(full) * dt;
  if (rest > tiny) step_in_place(field, scratch, rest, bc);
  field.time = t_end;
  return field;
}

Field1D solve(Field1D field, const ThermalMedium& medium, double t_end,
              const BoundaryCondition& bc, double lambda) {
  field.diffusivity = medium.diffusivity();
  return solve(std::move(field), t_end, bc, lambda);
}

double SineSeries::evaluate(double x, double t, double diffusivity) const {
  double sum = 0.0;
  for (std::size_t k = 1; k <= coefficients.size(); ++k) {
    const double wave = static_cast<double>(k) * std::numbers::pi / length;
    sum += coefficients[k - 1] * std::sin(wave * x) *
           std::exp(-diffusivity * wave * wave * t);
  }
  return sum;
}

SineSeries sine_series(double length, const Field1D& initial,
                       std::size_t n_terms) {
  initial.validate();
  if (!(length > 0.0)) {
    throw std::invalid_argument("sine_series: length must be > 0");
  }
  if (n_terms == 0) {
    throw std::invalid_argument("sine_series: need at least one term");
  }
  const double tol = 1e-9 * length;
  if (std::abs(initial.left_face()) > tol ||
      std::abs(initial.right_face() - length) > tol) {
    throw std::invalid_argument("sine_series: initial field must tile [0, L]");
  }
  SineSeries s;
  s.length = length;
  s.coefficients.resize(n_terms);
  for (std::size_t k = 1; k <= n_terms; ++k) {
    const double wave = static_cast<double>(k) * std::numbers::pi / length;
    double b = 0.0;
    for (std::size_t i = 0; i < initial.size(); ++i) {
      b += initial.values[i] * std::sin(wave * initial.x(i));
    }
    s.coefficients[k - 1] = 2.0 / length * b * initial.dx;
  }
  return s;
}

Field1D trig_series_dirichlet(double length, const Field1D& initial,
                              double diffusivity, double t,
                              std::size_t n_terms) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("trig_series_dirichlet: t must be >= 0");
  }
  if (!(diffusivity > 0.0)) {
    throw std::invalid_argument("trig_series_dirichlet: diffusivity must be > 0");
  }
  const SineSeries series = sine_series(length, initial, n_terms);
  Field1D out = initial;
  out.diffusivity = diffusivity;
  out.time = t;
  out.outflow = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] = series.evaluate(out.x(i), t, diffusivity);
  }
  return out;
}

double field_cdf(const Field1D& field, double x) {
  if (x <= field.left_face()) return 0.0;
  const double pos = (x - field.left_face()) / field.dx;
  const auto full = static_cast<std::size_t>(std::floor(pos));
  CompensatedSum s;
  const std::size_t whole = std::min(full, field.size());
  for (std::size_t i = 0; i < whole; ++i) s.add(field.values[i]);
  double acc = s.value() * field.dx;
  if (full < field.size()) {
    acc += field.values[full] * (pos - static_cast<double>(full)) * field.dx;
  }
  return acc;
}

}  // namespace difflab
