#pragma once

// Problem parameters for the weighted radial fourth-order equation
//
//   Delta(|x|^-a Delta u) + lambda div(|x|^(-a-2) grad u) + mu |x|^(-a-4) u
//       = |x|^b u^p
//
// and the coefficients of the autonomous ODE obtained after the
// Emden-Fowler change of variables,  v'''' - K2 v'' + K0 v = v^p.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "biharm/error.hpp"

namespace biharm {

inline constexpr double kHyperbolaTolerance = 1e-12;

/// Solves the critical hyperbola (n+alpha)/2 + (n+beta)/(p+1) = n-2 for beta.
inline double beta_from_hyperbola(int n, double alpha, double p) {
  if (!(p > 1.0)) {
    throw Error(ErrorKind::Domain, "beta_from_hyperbola: requires p > 1");
  }
  if (n < 5) {
    throw Error(ErrorKind::Domain, "beta_from_hyperbola: requires n >= 5");
  }
  return (p + 1.0) * ((n - 2.0) - (n + alpha) / 2.0) - n;
}

/// Residual of the critical hyperbola relation.
inline double hyperbola_residual(int n, double alpha, double beta, double p) {
  return (n + alpha) / 2.0 + (n + beta) / (p + 1.0) - (n - 2.0);
}

/// A validated problem instance (n, alpha, beta, p, lambda, mu). Immutable.
class ProblemParams {
 public:
  /// Validates and builds. beta is recomputed from the hyperbola when absent;
  /// a supplied beta must satisfy it to 1e-12.
  static ProblemParams create(int n, double alpha, double p, double lambda,
                              double mu,
                              std::optional<double> beta = std::nullopt) {
    auto fail = [](const std::string& msg) {
      throw Error(ErrorKind::Validation, msg);
    };
    if (!std::isfinite(alpha) || !std::isfinite(p) || !std::isfinite(lambda) ||
        !std::isfinite(mu) || (beta && !std::isfinite(*beta))) {
      fail("parameters must be finite");
    }
    if (n < 5) fail("dimension n must satisfy n >= 5");
    if (!(alpha > -n && alpha < n - 4)) {
      std::ostringstream os;
      os << "weight exponent alpha must satisfy -n < alpha < n-4 (got alpha="
         << alpha << ", n=" << n << ")";
      fail(os.str());
    }
    if (!(p > 1.0)) fail("nonlinearity exponent must satisfy p > 1");
    double b = beta ? *beta : beta_from_hyperbola(n, alpha, p);
    if (beta) {
      const double res = hyperbola_residual(n, alpha, b, p);
      if (std::abs(res) > kHyperbolaTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "critical hyperbola (n+alpha)/2 + (n+beta)/(p+1) = n-2 violated "
              "(residual "
           << res << ")";
        fail(os.str());
      }
    }
    return ProblemParams(n, alpha, b, p, lambda, mu);
  }

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] double p() const noexcept { return p_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] double mu() const noexcept { return mu_; }

  /// (n-4-alpha)/2, the Emden-Fowler exponent.
  [[nodiscard]] double ef_exponent() const noexcept {
    return (n_ - 4.0 - alpha_) / 2.0;
  }

  [[nodiscard]] ProblemParams with_lambda(double lambda) const {
    return create(n_, alpha_, p_, lambda, mu_, beta_);
  }
  [[nodiscard]] ProblemParams with_mu(double mu) const {
    return create(n_, alpha_, p_, lambda_, mu, beta_);
  }

 private:
  ProblemParams(int n, double alpha, double beta, double p, double lambda,
                double mu)
      : n_(n), alpha_(alpha), beta_(beta), p_(p), lambda_(lambda), mu_(mu) {}

  int n_;
  double alpha_;
  double beta_;
  double p_;
  double lambda_;
  double mu_;
};

/// Coefficients of v'''' - K2 v'' + K0 v = v^p. Orbit and variational solvers
/// take these directly so they can also run on synthetic (K2, K0, p).
struct OdeCoefficients {
  double K2;
  double K0;
  double p;
};

struct DerivedCoefficients {
  double K2 = 0.0;
  double K0 = 0.0;
  /// Positive constant solution K0^(1/(p-1)); empty when K0 <= 0.
  std::optional<double> l;
  /// Roots of r^4 - K2 r^2 + K0, ordered lam1 > lam2 > 0 > lam4 > lam3 in the
  /// real case (lam3 = -lam1, lam4 = -lam2).
  std::array<std::complex<double>, 4> lam{};
  bool eigenvalues_real = false;
  double p = 0.0;

  [[nodiscard]] OdeCoefficients ode() const { return {K2, K0, p}; }

  /// Real part of eigenvalue i in 1..4.
  [[nodiscard]] double real_lam(int i) const { return lam.at(i - 1).real(); }
};

namespace detail {

inline DerivedCoefficients eigen_from(double K2, double K0, double p,
                                      double disc) {
  DerivedCoefficients d;
  d.K2 = K2;
  d.K0 = K0;
  d.p = p;
  if (K0 > 0.0) d.l = std::pow(K0, 1.0 / (p - 1.0));

  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double r1sq = 0.5 * (K2 + s);
    // Vieta for the smaller root avoids cancellation in (K2 - s)/2.
    const double r2sq = r1sq > 0.0 ? K0 / r1sq : 0.5 * (K2 - s);
    if (r1sq >= 0.0 && r2sq >= 0.0) {
      const double a = std::sqrt(r1sq);
      const double b = std::sqrt(r2sq);
      d.lam = {std::complex<double>(a), std::complex<double>(b),
               std::complex<double>(-a), std::complex<double>(-b)};
      d.eigenvalues_real = true;
      return d;
    }
    const auto a = std::sqrt(std::complex<double>(r1sq));
    const auto b = std::sqrt(std::complex<double>(r2sq));
    d.lam = {a, b, -a, -b};
    return d;
  }
  const std::complex<double> s = std::sqrt(std::complex<double>(disc));
  const auto a = std::sqrt(0.5 * (K2 + s));
  const auto b = std::sqrt(0.5 * (K2 - s));
  d.lam = {a, b, -a, -b};
  return d;
}

}  // namespace detail

inline DerivedCoefficients derive_coefficients(const ProblemParams& prm) {
  const double n = prm.n();
  const double a = prm.alpha();
  const double lam = prm.lambda();
  const double k = (n - 4.0 - a) / 2.0;
  const double K2 = ((n - 2.0) * (n - 2.0) + (a + 2.0) * (a + 2.0)) / 2.0 - lam;
  const double K0 = (n - 4.0 - a) * (n - 4.0 - a) * (n + a) * (n + a) / 16.0 -
                    lam * k * k + prm.mu();
  // K2^2 - 4 K0 written in the form that is exact at the factorized points.
  const double shift = lam - (n - 2.0) * (a + 2.0);
  const double disc = shift * shift - 4.0 * prm.mu();
  return detail::eigen_from(K2, K0, prm.p(), disc);
}

/// Eigenvalues of the linearization at v = 0 for synthetic coefficients.
inline DerivedCoefficients derive_coefficients(const OdeCoefficients& c) {
  return detail::eigen_from(c.K2, c.K0, c.p, c.K2 * c.K2 - 4.0 * c.K0);
}

struct ConditionReport {
  bool c1 = false;
  bool c2 = false;
  bool c3 = false;
  bool norm_ok = false;
  bool uniqueness_ok = false;
  bool periodicity_regime = false;
  bool singular_regime = false;
};

inline ConditionReport check_conditions(const ProblemParams& prm) {
  const double n = prm.n();
  const double a = prm.alpha();
  const double lam = prm.lambda();
  const double mu = prm.mu();
  const double w = n - 4.0 - a;
  const double k4 = std::pow(w / 2.0, 4);
  const double hardy_bound = 4.0 * mu / (w * w) + (n + a) * (n + a) / 4.0;
  const double center = (n - 2.0) * (2.0 + a);
  const double sqrt_mu = mu >= 0.0 ? std::sqrt(mu) : 0.0;

  ConditionReport r;
  r.c1 = mu >= 0.0 && lam <= center - 2.0 * sqrt_mu;
  r.c2 = mu >= 0.0 && mu <= k4 && center + 2.0 * sqrt_mu <= lam &&
         lam <= hardy_bound;
  r.c3 = mu <= 0.0 && lam <= hardy_bound;
  r.norm_ok = (lam <= hardy_bound && mu <= k4) ||
              (lam <= w * w / 4.0 + (n + a) * (n + a) / 4.0 && mu > k4);
  const auto d = derive_coefficients(prm);
  r.uniqueness_ok = d.K2 * d.K2 - 4.0 * d.K0 >= 0.0;
  r.periodicity_regime =
      a > -2.0 && a < n - 4.0 && mu > 0.0 && lam <= center - 2.0 * sqrt_mu;
  r.singular_regime =
      a > -n && a <= -2.0 && mu >= 0.0 && lam > center + 2.0 * sqrt_mu;
  return r;
}

enum class ExplicitCase { Case1, Case2 };

inline const char* to_string(ExplicitCase c) {
  return c == ExplicitCase::Case1 ? "Case1" : "Case2";
}

/// Values of lambda for which the explicit cosh-power solution exists.
struct LambdaBranches {
  double plus = 0.0;
  double minus = 0.0;
  /// lambda from the single closed form covering both cases; equals one of
  /// the two branches.
  double unified = 0.0;
  double p = 0.0;
  double beta = 0.0;
};

/// Exponent p induced by the case's relation between alpha and beta.
inline double explicit_case_p(ExplicitCase c, int n, double alpha) {
  const double w = n - 4.0 - alpha;
  return c == ExplicitCase::Case1 ? 2.0 * (n + alpha) / w - 1.0
                                  : 2.0 * w / (n + alpha) - 1.0;
}

inline LambdaBranches explicit_lambda_branches(ExplicitCase c, int n,
                                               double alpha, double mu) {
  if (n < 5 || !(alpha > -n && alpha < n - 4.0)) {
    throw Error(ErrorKind::Validation,
                "explicit branches need n >= 5 and -n < alpha < n-4");
  }
  if (c == ExplicitCase::Case1 && !(alpha > -2.0)) {
    throw Error(ErrorKind::Regime,
                "Case1 (alpha = beta) requires alpha > -2");
  }
  if (c == ExplicitCase::Case2 && !(alpha < -2.0)) {
    throw Error(ErrorKind::Regime,
                "Case2 ((n+alpha)(n+beta) = (n-4-alpha)^2) requires alpha < -2");
  }
  const double nm2 = n - 2.0;
  const double q = explicit_case_p(c, n, alpha) + 1.0;  // p + 1
  const double q2 = q * q;
  const double q4 = q2 * q2;
  const double p3 = q + 2.0;  // p + 3
  const double p3_4 = std::pow(p3, 4);
  const double g = q2 + 4.0;
  const double mu_scaled = mu / std::pow(nm2, 4);

  double rad, base, denom;
  if (c == ExplicitCase::Case1) {
    rad = (q4 - 16.0) * (q4 - 16.0) + q2 * p3_4 * g * g * mu_scaled;
    base = q4 - 16.0;
    denom = 2.0 * q2 * p3 * p3;
  } else {
    rad = q4 * (q4 - 16.0) * (q4 - 16.0) + 16.0 * q2 * p3_4 * g * g * mu_scaled;
    base = q2 * (16.0 - q4);
    denom = 8.0 * q2 * p3 * p3;
  }
  if (rad < 0.0) {
    std::ostringstream os;
    os << "explicit-solution lambda relation has negative radicand (" << rad
       << ") for mu=" << mu;
    throw Error(ErrorKind::Domain, os.str());
  }
  const double sq = std::sqrt(rad);
  LambdaBranches out;
  out.plus = nm2 * nm2 * (base + sq) / denom;
  out.minus = nm2 * nm2 * (base - sq) / denom;
  out.p = q - 1.0;
  out.beta = c == ExplicitCase::Case1
                 ? alpha
                 : (n - 4.0 - alpha) * (n - 4.0 - alpha) / (n + alpha) - n;

  const double w = n - 4.0 - alpha;
  const double a2 = 2.0 + alpha;
  const double urad = nm2 * nm2 * a2 * a2 * w * w + 4.0 * (n + alpha) * (n + alpha) * mu;
  if (urad < 0.0) {
    throw Error(ErrorKind::Domain,
                "unified explicit-solution lambda formula has negative radicand");
  }
  out.unified = (nm2 * nm2 + a2 * a2) * (nm2 * a2 * w + std::sqrt(urad)) /
                ((n + alpha) * (n + alpha) * w);
  const double scale = std::max({1.0, std::abs(out.plus), std::abs(out.minus)});
  if (std::min(std::abs(out.unified - out.plus),
               std::abs(out.unified - out.minus)) > 1e-10 * scale) {
    throw Error(ErrorKind::Validation,
                "unified lambda formula disagrees with both branches");
  }
  return out;
}

}  // namespace biharm
