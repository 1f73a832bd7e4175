#pragma once

// Gamma, Beta and the cosh-power integral used by the best-constant formulas.

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "biharm/error.hpp"
#include "biharm/quadrature.hpp"

namespace biharm {

namespace detail {

// Lanczos approximation, g = 7, nine terms.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::floor(x);
}

inline double lanczos_series(double z) {
  // z is the shifted argument x - 1.
  double s = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) {
    s += kLanczosCoef[i] / (z + static_cast<double>(i));
  }
  return s;
}

}  // namespace detail

inline double gamma_fn(double x) {
  using std::numbers::pi;
  if (detail::is_nonpositive_integer(x)) {
    std::ostringstream os;
    os << "gamma_fn: pole at x=" << x;
    throw Error(ErrorKind::Domain, os.str());
  }
  if (x < 0.5) {
    // Reflection formula.
    return pi / (std::sin(pi * x) * gamma_fn(1.0 - x));
  }
  const double z = x - 1.0;
  const double t = z + detail::kLanczosG + 0.5;
  const double s = detail::lanczos_series(z);
  if (x > 140.0) {
    return std::exp(0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t) * s;
  }
  return std::sqrt(2.0 * pi) * std::pow(t, z + 0.5) * std::exp(-t) * s;
}

inline double beta_fn(double a, double b) {
  if (detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b)) {
    std::ostringstream os;
    os << "beta_fn: pole at (" << a << ", " << b << ")";
    throw Error(ErrorKind::Domain, os.str());
  }
  // 1/Gamma vanishes at the poles of the denominator.
  if (detail::is_nonpositive_integer(a + b)) return 0.0;
  return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b);
}

/// Integral of (cosh(nu t))^gamma over [0, inf), via the Beta function.
inline double cosh_power_integral(double gamma_exp, double nu) {
  if (!(gamma_exp < 0.0)) {
    throw Error(ErrorKind::Domain,
                "cosh_power_integral: diverges unless gamma_exp < 0");
  }
  if (!(nu > 0.0)) {
    throw Error(ErrorKind::Domain, "cosh_power_integral: requires nu > 0");
  }
  return 0.5 * beta_fn(-gamma_exp / 2.0, 0.5) / nu;
}

/// Same integral by composite Gauss-Legendre on [0, T], T chosen so that
/// sech(nu T)^|gamma| < 1e-16. Cross-check for the closed form.
inline double cosh_power_integral_quadrature(double gamma_exp, double nu) {
  if (!(gamma_exp < 0.0)) {
    throw Error(ErrorKind::Domain,
                "cosh_power_integral: diverges unless gamma_exp < 0");
  }
  if (!(nu > 0.0)) {
    throw Error(ErrorKind::Domain, "cosh_power_integral: requires nu > 0");
  }
  const double g = -gamma_exp;
  const double T = std::acosh(std::pow(10.0, 16.0 / g)) / nu;
  const int panels = static_cast<int>(std::ceil(nu * T / 0.25));
  static const GaussLegendreRule rule(20);
  auto f = [&](double t) {
    // cosh^gamma = exp(gamma * log cosh), log cosh written without overflow.
    const double x = nu * t;
    const double log_cosh = x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
    return std::exp(gamma_exp * log_cosh);
  };
  return composite_gauss_legendre(f, 0.0, T, panels, rule);
}

/// Surface measure of the unit sphere S^{n-1}.
struct SphereMeasure {
  int n;
  double omega_n;

  explicit SphereMeasure(int dim)
      : n(dim),
        omega_n(2.0 * std::pow(std::numbers::pi, dim / 2.0) / gamma_fn(dim / 2.0)) {}
};

inline double sphere_measure(int n) { return SphereMeasure(n).omega_n; }

}  // namespace biharm
