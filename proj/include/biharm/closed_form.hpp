#pragma once

// Explicit solutions v(t) = C (cosh nu t)^m of v'''' - K2 v'' + K0 v = v^p
// and their radial form u(r) = r^{-(n-4-alpha)/2} v(-ln r).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "biharm/error.hpp"
#include "biharm/params.hpp"

namespace biharm {

enum class SolutionCase { Case1, Case2, Generic };

inline const char* to_string(SolutionCase c) {
  switch (c) {
    case SolutionCase::Case1: return "Case1";
    case SolutionCase::Case2: return "Case2";
    case SolutionCase::Generic: return "Generic";
  }
  return "Generic";
}

struct CoshSolution {
  double m = 0.0;
  double nu = 0.0;
  double C = 0.0;
  SolutionCase case_tag = SolutionCase::Generic;
  /// Power of r in front of (1 + r^{2 nu})^m: (n-4-alpha)/2 + nu m.
  double gamma_decay = 0.0;
  OdeCoefficients coeffs{};
};

/// v(t) = r^exponent u(r) with t = -ln r, exponent = (n-4-alpha)/2.
struct EmdenFowlerMap {
  int n;
  double alpha;
  double exponent;

  EmdenFowlerMap(int dim, double a)
      : n(dim), alpha(a), exponent((dim - 4.0 - a) / 2.0) {
    if (!(exponent > 0.0)) {
      throw Error(ErrorKind::Domain,
                  "Emden-Fowler exponent (n-4-alpha)/2 must be positive");
    }
  }

  explicit EmdenFowlerMap(const ProblemParams& prm)
      : EmdenFowlerMap(prm.n(), prm.alpha()) {}

  /// v(t) from u.
  template <class U>
  [[nodiscard]] double to_v(U&& u, double t) const {
    return std::exp(-exponent * t) * u(std::exp(-t));
  }

  /// u(r) from v.
  template <class V>
  [[nodiscard]] double to_u(V&& v, double r) const {
    return std::pow(r, -exponent) * v(-std::log(r));
  }
};

/// Ratio K2^2/K0 forced on every cosh-power solution, as a function of p.
inline double explicit_ratio(double p) {
  const double q2 = (p + 1.0) * (p + 1.0);
  return (q2 + 4.0) * (q2 + 4.0) / (4.0 * q2);
}

/// Relative defect of 4(p+1)^2 K2^2 = ((p+1)^2+4)^2 K0.
inline double solvability_defect(const OdeCoefficients& c) {
  const double q2 = (c.p + 1.0) * (c.p + 1.0);
  const double lhs = 4.0 * q2 * c.K2 * c.K2;
  const double rhs = (q2 + 4.0) * (q2 + 4.0) * c.K0;
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

inline constexpr double kSolvabilityTolerance = 1e-9;

/// Cosh-power solution of the reduced ODE alone (case Generic, no decay
/// exponent since there is no underlying radial problem).
inline CoshSolution build_cosh_solution(const OdeCoefficients& c) {
  if (!(c.K2 > 0.0)) {
    throw Error(ErrorKind::NoExplicitSolution,
                "explicit cosh-power solution requires K2 > 0");
  }
  if (!(c.p > 1.0)) {
    throw Error(ErrorKind::Domain, "explicit solution requires p > 1");
  }
  const double defect = solvability_defect(c);
  if (defect > kSolvabilityTolerance) {
    std::ostringstream os;
    os << "no explicit cosh-power solution: relation 4(p+1)^2 K2^2 = "
          "((p+1)^2+4)^2 K0 fails (relative defect "
       << defect << ")";
    throw Error(ErrorKind::NoExplicitSolution, os.str());
  }
  CoshSolution s;
  s.coeffs = c;
  s.m = -4.0 / (c.p - 1.0);
  const double m = s.m;
  s.nu = std::sqrt(c.K2 / (m * m + (m - 2.0) * (m - 2.0)));
  const double amp = m * (m - 1.0) * (m - 2.0) * (m - 3.0) * std::pow(s.nu, 4);
  if (!(amp > 0.0)) {
    throw Error(ErrorKind::NoExplicitSolution,
                "explicit solution amplitude C^(p-1) is not positive");
  }
  s.C = std::pow(amp, 1.0 / (c.p - 1.0));
  s.gamma_decay = std::numeric_limits<double>::quiet_NaN();
  return s;
}

inline CoshSolution build_cosh_solution(const ProblemParams& prm) {
  const auto d = derive_coefficients(prm);
  CoshSolution s = build_cosh_solution(d.ode());
  const double n = prm.n();
  const double a = prm.alpha();
  s.gamma_decay = prm.ef_exponent() + s.nu * s.m;

  const double tol = 1e-12 * std::max(1.0, std::abs(s.m));
  if (a > -2.0 && std::abs(s.m + (n - 4.0 - a) / (2.0 + a)) <= tol) {
    s.case_tag = SolutionCase::Case1;
  } else if (a < -2.0 && std::abs(s.m - (n + a) / (2.0 + a)) <= tol) {
    s.case_tag = SolutionCase::Case2;
  } else {
    s.case_tag = SolutionCase::Generic;
  }
  return s;
}

/// v and its first four derivatives at t. Each derivative is a polynomial in
/// sech^2(nu t) (times tanh for odd orders) multiplying C cosh^m, and cosh^m
/// is formed in log space so large |t| does not overflow.
inline std::array<double, 5> eval_v_all(const CoshSolution& s, double t) {
  const double m = s.m;
  const double nu = s.nu;
  const double x = nu * std::abs(t);
  const double log_cosh = x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
  const double cm = s.C * std::exp(m * log_cosh);
  const double sech2 = std::exp(-2.0 * log_cosh);
  const double th = std::tanh(nu * t);
  const double m1 = m * (m - 1.0);
  const double m2 = m1 * (m - 2.0);
  const double m3 = m2 * (m - 3.0);
  const double nu2 = nu * nu;

  std::array<double, 5> out{};
  out[0] = cm;
  out[1] = m * nu * th * cm;
  out[2] = nu2 * (m * m - m1 * sech2) * cm;
  out[3] = nu2 * nu * th * (m * m * m - m2 * sech2) * cm;
  out[4] = nu2 * nu2 *
           (m * m * m * m - m1 * (m * m + (m - 2.0) * (m - 2.0)) * sech2 +
            m3 * sech2 * sech2) *
           cm;
  return out;
}

inline double eval_v(const CoshSolution& s, double t, int order) {
  if (order < 0 || order > 4) {
    throw Error(ErrorKind::Domain, "eval_v: derivative order must be in 0..4");
  }
  return eval_v_all(s, t)[order];
}

/// u(r) = (C / 2^m) r^{-gamma} (1 + r^{2 nu})^m, evaluated in log space.
inline double eval_u(const CoshSolution& s, const EmdenFowlerMap& map,
                     double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "eval_u: requires r > 0");
  const double gamma = map.exponent + s.nu * s.m;
  const double y = 2.0 * s.nu * std::log(r);
  const double log1p_pow = y > 0.0 ? y + std::log1p(std::exp(-y))
                                   : std::log1p(std::exp(y));
  return std::exp(std::log(s.C) - s.m * std::numbers::ln2 -
                  gamma * std::log(r) + s.m * log1p_pow);
}

/// v'''' - K2 v'' + K0 v - v^p for a callable returning (v, v', ..., v'''').
template <class VFun>
double ode_residual(VFun&& vfun, double t, double K2, double K0, double p) {
  const std::array<double, 5> v = vfun(t);
  return v[4] - K2 * v[2] + K0 * v[0] - std::pow(v[0], p);
}

/// Applies the forward then the inverse Emden-Fowler transform to u at r.
template <class U>
double emden_fowler_roundtrip(const EmdenFowlerMap& map, U&& u, double r) {
  if (!(r > 0.0)) {
    throw Error(ErrorKind::Domain, "emden_fowler_roundtrip: requires r > 0");
  }
  auto v = [&](double t) { return map.to_v(u, t); };
  return map.to_u(v, r);
}

}  // namespace biharm
