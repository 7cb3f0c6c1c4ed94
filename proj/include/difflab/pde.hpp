#pragma once

// One-dimensional heat/diffusion equation: eta * d2T/dx2 = dT/dt.
//
// Fields live on a cell-centred grid: value i is the cell average over
// [x0 + (i - 1/2) dx, x0 + (i + 1/2) dx], and boundary conditions act on the
// outer cell faces. In probability mode the same machinery evolves a
// relative-frequency density f with rho*c == 1.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace difflab {

class ThermalMedium {
 public:
  /// conductivity K [W/(m K)], density rho [kg/m^3], specific heat
  /// c [J/(kg K)]; all > 0.
  ThermalMedium(double conductivity, double density, double specific_heat);

  /// rho*c == 1 so that heat content is the plain integral of the field and
  /// the diffusivity equals `diffusivity`.
  static ThermalMedium probability_mode(double diffusivity);

  double conductivity() const noexcept { return k_; }
  double density() const noexcept { return rho_; }
  double specific_heat() const noexcept { return c_; }
  /// K / (rho c) [m^2/s]
  double diffusivity() const noexcept { return k_ / (rho_ * c_); }
  double volumetric_heat_capacity() const noexcept { return rho_ * c_; }

 private:
  double k_;
  double rho_;
  double c_;
};

struct Field1D {
  /// Centre of cell 0.
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> values;
  double diffusivity = 1.0;
  double time = 0.0;
  /// Cumulative integral of the field that has left through the ends
  /// (Dirichlet and absorbing boundaries). Content + outflow is conserved.
  double outflow = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t i) const noexcept {
    return x0 + static_cast<double>(i) * dx;
  }
  double left_face() const noexcept { return x0 - 0.5 * dx; }
  double right_face() const noexcept {
    return x0 + (static_cast<double>(values.size()) - 0.5) * dx;
  }

  /// Throws std::invalid_argument unless dx > 0, diffusivity > 0, there are
  /// at least 2 cells and every value is finite.
  void validate() const;
};

/// Field with `cells` cells covering [lo, hi], each set to profile(centre).
Field1D make_field(double lo, double hi, std::size_t cells, double diffusivity,
                   const std::function<double(double)>& profile);

/// Discrete delta: all content Q in the cell centred on x = 0, on
/// 2*half_cells + 1 cells of width dx.
Field1D point_source(double dx, std::size_t half_cells, double diffusivity,
                     double content = 1.0);

/// sin(pi x / L) on [0, L].
Field1D sine_profile(double length, std::size_t cells, double diffusivity);

/// 1 on the left half of [0, L], 0 on the right half.
Field1D step_profile(double length, std::size_t cells, double diffusivity);

struct BoundarySide {
  enum class Kind { Dirichlet, Reflecting, Absorbing };
  Kind kind = Kind::Reflecting;
  double value = 0.0;

  static BoundarySide dirichlet(double value) { return {Kind::Dirichlet, value}; }
  static BoundarySide reflecting() { return {Kind::Reflecting, 0.0}; }
  static BoundarySide absorbing() { return {Kind::Absorbing, 0.0}; }
};

struct BoundaryCondition {
  BoundarySide left;
  BoundarySide right;

  static BoundaryCondition reflecting() {
    return {BoundarySide::reflecting(), BoundarySide::reflecting()};
  }
  static BoundaryCondition absorbing() {
    return {BoundarySide::absorbing(), BoundarySide::absorbing()};
  }
  static BoundaryCondition dirichlet(double left, double right) {
    return {BoundarySide::dirichlet(left), BoundarySide::dirichlet(right)};
  }
};

/// Raised when eta*dt/dx^2 exceeds 1/2.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(double lambda);
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

inline constexpr double kMaxStableLambda = 0.5;
inline constexpr double kDefaultLambda = 0.25;

/// Free-space solution for content Q released at x = 0, t = 0:
/// Q / sqrt(4 pi D t) * exp(-x^2 / (4 D t)). Requires t > 0, D > 0.
double green_function(double x, double t, double diffusivity,
                      double content = 1.0);

/// Cumulative integral of green_function from -inf to x.
double green_cdf(double x, double t, double diffusivity, double content = 1.0);

/// sum rho*c*T_i*dx per unit cross-section.
double heat_content(const Field1D& field, const ThermalMedium& medium);
/// Probability mode: sum f_i*dx.
double heat_content(const Field1D& field);

/// One forward-time centred-space step. Throws StabilityError when
/// eta*dt/dx^2 > 1/2.
Field1D ftcs_step(const Field1D& field, double dt, const BoundaryCondition& bc);

/// Steps at lambda = eta*dt/dx^2 until t_end; the last step is shortened to
/// land exactly on t_end.
Field1D solve(Field1D field, double t_end, const BoundaryCondition& bc,
              double lambda = kDefaultLambda);
/// Same, taking the diffusivity from a medium.
Field1D solve(Field1D field, const ThermalMedium& medium, double t_end,
              const BoundaryCondition& bc, double lambda = kDefaultLambda);

/// Sine-series solution on a rod [0, L] with zero Dirichlet ends.
struct SineSeries {
  double length = 1.0;
  /// b_k for k = 1..n_terms (index k - 1).
  std::vector<double> coefficients;

  double evaluate(double x, double t, double diffusivity) const;
};

/// b_k = (2/L) * integral f(x) sin(k pi x / L) dx by midpoint quadrature over
/// the initial field's cells, which must tile [0, L].
SineSeries sine_series(double length, const Field1D& initial,
                       std::size_t n_terms);

/// T(x, t) = sum_k b_k sin(k pi x / L) exp(-eta (k pi / L)^2 t) on the
/// initial field's grid.
Field1D trig_series_dirichlet(double length, const Field1D& initial,
                              double diffusivity, double t,
                              std::size_t n_terms);

/// Cumulative integral of a probability-mode field, treating each cell as
/// constant; 0 left of the domain, total content right of it.
double field_cdf(const Field1D& field, double x);

}  // namespace difflab
