#pragma once

#include <compare>
#include <string>

namespace difflab::units {

/// SI quantity tagged with integer exponents of metre, kilogram, second,
/// kelvin and mole. Products and quotients combine the exponents at compile
/// time, so a formula with the wrong dimensions fails to build.
template <int L, int M, int T, int K, int N>
struct Quantity {
  static constexpr int length = L;
  static constexpr int mass = M;
  static constexpr int time = T;
  static constexpr int temperature = K;
  static constexpr int amount = N;

  double value = 0.0;

  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value(v) {}

  constexpr Quantity operator+(Quantity o) const { return Quantity(value + o.value); }
  constexpr Quantity operator-(Quantity o) const { return Quantity(value - o.value); }
  constexpr Quantity operator*(double s) const { return Quantity(value * s); }
  constexpr Quantity operator/(double s) const { return Quantity(value / s); }
  friend constexpr Quantity operator*(double s, Quantity q) { return Quantity(s * q.value); }
  constexpr auto operator<=>(const Quantity&) const = default;

  template <int L2, int M2, int T2, int K2, int N2>
  constexpr auto operator*(Quantity<L2, M2, T2, K2, N2> o) const {
    return Quantity<L + L2, M + M2, T + T2, K + K2, N + N2>(value * o.value);
  }
  template <int L2, int M2, int T2, int K2, int N2>
  constexpr auto operator/(Quantity<L2, M2, T2, K2, N2> o) const {
    return Quantity<L - L2, M - M2, T - T2, K - K2, N - N2>(value / o.value);
  }

  /// e.g. "m^2 s^-1"; empty for dimensionless.
  static std::string symbol() {
    std::string s;
    auto term = [&s](const char* name, int e) {
      if (e == 0) return;
      if (!s.empty()) s += ' ';
      s += name;
      if (e != 1) s += '^' + std::to_string(e);
    };
    term("kg", M);
    term("m", L);
    term("s", T);
    term("K", K);
    term("mol", N);
    return s;
  }
};

template <int L, int M, int T, int K, int N>
constexpr auto operator/(double s, Quantity<L, M, T, K, N> q) {
  return Quantity<-L, -M, -T, -K, -N>(s / q.value);
}

using Dimensionless = Quantity<0, 0, 0, 0, 0>;
using Length = Quantity<1, 0, 0, 0, 0>;
using Area = Quantity<2, 0, 0, 0, 0>;
using Time = Quantity<0, 0, 1, 0, 0>;
using Temperature = Quantity<0, 0, 0, 1, 0>;
using Diffusivity = Quantity<2, 0, -1, 0, 0>;
/// Pa s = kg m^-1 s^-1
using Viscosity = Quantity<-1, 1, -1, 0, 0>;
/// J mol^-1 K^-1
using MolarGasConstant = Quantity<2, 1, -2, -1, -1>;
using PerMole = Quantity<0, 0, 0, 0, -1>;

}  // namespace difflab::units
