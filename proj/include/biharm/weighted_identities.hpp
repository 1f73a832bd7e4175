#pragma once

// Weighted radial integrals ||f||_{w}^2 = int_{R^n} |x|^{-w} f^2 dx and checks
// of the Hardy-Rellich type decompositions built from
//   T_a u = u' + (n-2-a)/(2r) u.
// Integrals are taken in t = -ln r, where r^{-w} r^{n-1} dr becomes
// e^{-t(n-w)} dt and the origin sits at t = +infinity.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "biharm/error.hpp"
#include "biharm/params.hpp"
#include "biharm/quadrature.hpp"
#include "biharm/special_functions.hpp"

namespace biharm {

/// u, u', u'' at one radius.
struct RadialSample {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
};

struct RadialTestFunction {
  std::string name;
  std::function<RadialSample(double)> eval;
  double r_min = 0.0;  // effective support
  double r_max = 0.0;
  std::string smoothness;
};

/// e^{-r^2}
inline RadialTestFunction gaussian() {
  return {"gaussian",
          [](double r) {
            const double e = std::exp(-r * r);
            return RadialSample{e, -2.0 * r * e, (4.0 * r * r - 2.0) * e};
          },
          0.0, 7.0, "smooth at 0"};
}

/// r^2 e^{-r^2}
inline RadialTestFunction r2_gaussian() {
  return {"r2_gaussian",
          [](double r) {
            const double e = std::exp(-r * r);
            const double r2 = r * r;
            return RadialSample{r2 * e, (2.0 * r - 2.0 * r2 * r) * e,
                                (2.0 - 10.0 * r2 + 4.0 * r2 * r2) * e};
          },
          0.0, 7.0, "smooth, vanishes to second order at 0"};
}

/// e^{-(ln r)^2}
inline RadialTestFunction log_gaussian() {
  return {"log_gaussian",
          [](double r) {
            const double s = std::log(r);
            const double u = std::exp(-s * s);
            return RadialSample{u, -2.0 * s * u / r,
                                u * (-2.0 + 2.0 * s + 4.0 * s * s) / (r * r)};
          },
          1e-6, 1e6, "flat at 0 and infinity in log scale"};
}

/// sech(ln r) = 2r/(1+r^2)
inline RadialTestFunction sech_log() {
  return {"sech_log",
          [](double r) {
            if (r > 1e150) {
              // 1 + r^2 overflows; use the leading terms of the expansion.
              return RadialSample{2.0 / r, -2.0 / (r * r), 4.0 / (r * r * r)};
            }
            const double q = 1.0 + r * r;
            return RadialSample{2.0 * r / q, 2.0 * (1.0 - r * r) / (q * q),
                                4.0 * r * (r * r - 3.0) / (q * q * q)};
          },
          0.0, std::numeric_limits<double>::infinity(), "algebraic decay 2/r"};
}

inline std::vector<RadialTestFunction> test_function_suite() {
  return {gaussian(), r2_gaussian(), log_gaussian(), sech_log()};
}

inline RadialTestFunction test_function_by_name(const std::string& name) {
  for (auto& f : test_function_suite()) {
    if (f.name == name) return f;
  }
  if (name == "zero") {
    return {"zero", [](double) { return RadialSample{}; }, 0.0, 0.0, "zero"};
  }
  throw Error(ErrorKind::Usage, "unknown test function '" + name + "'");
}

/// Composite Gauss-Legendre nodes on (-T, T) in t = -ln r.
struct QuadratureGrid {
  double T = 40.0;
  double panel = 0.25;
  int order = 16;
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureGrid make(double T = 40.0, double panel = 0.25, int order = 16) {
    if (!(T > 0.0) || !(panel > 0.0)) {
      throw Error(ErrorKind::Domain, "quadrature grid: T and panel must be positive");
    }
    QuadratureGrid g;
    g.T = T;
    g.panel = panel;
    g.order = order;
    const GaussLegendreRule rule(order);
    const int panels = static_cast<int>(std::ceil(2.0 * T / panel - 1e-9));
    const double width = 2.0 * T / panels;
    for (int k = 0; k < panels; ++k) {
      const double mid = -T + (k + 0.5) * width;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        g.nodes.push_back(mid + 0.5 * width * rule.nodes[i]);
        g.weights.push_back(0.5 * width * rule.weights[i]);
      }
    }
    return g;
  }

  /// (T + 5, twice the nodes).
  [[nodiscard]] QuadratureGrid refined() const { return make(T + 5.0, panel / 2.0, order); }
};

inline constexpr double kTailThreshold = 1e-14;

/// omega_n int_0^inf g(r) r^{-w} r^{n-1} dr for a pointwise integrand g (not
/// squared). Throws TailNonConvergence when g r^{n-w} is not negligible at
/// both ends of the grid.
template <class G>
double weighted_integral_raw(G&& g, double weight_exp, int n, const QuadratureGrid& grid) {
  const std::size_t m = grid.nodes.size();
  std::vector<double> vals(m);
  double vmax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = grid.nodes[i];
    const double gv = g(std::exp(-t));
    // A vanished integrand stays zero even where the weight overflows.
    const double v = gv == 0.0 ? 0.0 : gv * std::exp(-t * (n - weight_exp));
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "weighted integral: integrand not finite at t=" << t
         << " (weight exponent " << weight_exp << ", n=" << n << ")";
      throw Error(ErrorKind::TailNonConvergence, os.str());
    }
    vals[i] = v;
    vmax = std::max(vmax, std::abs(v));
  }
  if (vmax == 0.0) return 0.0;
  const double ends = std::max(std::abs(vals.front()), std::abs(vals.back()));
  if (ends > kTailThreshold * vmax) {
    std::ostringstream os;
    os << "weighted integral with |x|^-" << weight_exp << " in dimension " << n
       << " does not decay at the ends of (-" << grid.T << ", " << grid.T
       << ") in t = -ln r (end/max = " << ends / vmax << ")";
    throw Error(ErrorKind::TailNonConvergence, os.str());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += grid.weights[i] * vals[i];
  return sphere_measure(n) * s;
}

/// ||f||_w^2 = omega_n int f(r)^2 r^{-w} r^{n-1} dr.
template <class F>
double weighted_integral(F&& f, double weight_exp, int n, const QuadratureGrid& grid) {
  return weighted_integral_raw(
      [&](double r) {
        const double v = f(r);
        return v * v;
      },
      weight_exp, n, grid);
}

/// T_a u(r) = u'(r) + (n-2-a)/(2r) u(r).
inline double t_operator(double a, int n, const RadialSample& s, double r) {
  return s.du + (n - 2.0 - a) / (2.0 * r) * s.u;
}

inline double t_operator(double a, int n, const RadialTestFunction& u, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "t_operator: requires r > 0");
  return t_operator(a, n, u.eval(r), r);
}

/// T_a(T_{a+2} u)(r), from (u, u', u'').
inline double t_composite(double a, int n, const RadialSample& s, double r) {
  const double k = (n - 4.0 - a) / 2.0;
  const double w = s.du + k * s.u / r;
  const double dw = s.d2u + k * s.du / r - k * s.u / (r * r);
  return dw + (n - 2.0 - a) / (2.0 * r) * w;
}

inline double radial_laplacian(int n, const RadialSample& s, double r) {
  return s.d2u + (n - 1.0) * s.du / r;
}

enum class IdentityId {
  LaplacianSplit,
  GradientSplit,
  TOperator,
  ShiftedGradientSplit,
  NormDecomp,
  Hardy,
  TauScaling
};

inline const char* to_string(IdentityId id) {
  switch (id) {
    case IdentityId::LaplacianSplit: return "LaplacianSplit";
    case IdentityId::GradientSplit: return "GradientSplit";
    case IdentityId::TOperator: return "TOperator";
    case IdentityId::ShiftedGradientSplit: return "ShiftedGradientSplit";
    case IdentityId::NormDecomp: return "NormDecomp";
    case IdentityId::Hardy: return "Hardy";
    case IdentityId::TauScaling: return "TauScaling";
  }
  return "?";
}

inline IdentityId identity_from_string(const std::string& s) {
  for (IdentityId id : {IdentityId::LaplacianSplit, IdentityId::GradientSplit, IdentityId::TOperator,
                        IdentityId::ShiftedGradientSplit, IdentityId::NormDecomp, IdentityId::Hardy,
                        IdentityId::TauScaling}) {
    if (s == to_string(id)) return id;
  }
  throw Error(ErrorKind::Usage, "unknown identity '" + s + "'");
}

inline constexpr double kIdentityTolerance = 1e-6;

struct IdentityReport {
  IdentityId id = IdentityId::LaplacianSplit;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
  /// Hardy only: lhs/rhs and the constant (n-4-alpha)^2/4.
  double ratio = 0.0;
  double constant = 0.0;
  /// TauScaling only: relative error of each of the four integral identities.
  std::vector<double> parts;
  bool passed = false;
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// int |x|^-a |Delta u|^2 - lambda |x|^{-a-2} |grad u|^2 + mu |x|^{-a-4} u^2.
inline double norm_alpha(const RadialTestFunction& u, int n, double alpha, double lambda,
                         double mu, const QuadratureGrid& grid) {
  const double lap = weighted_integral(
      [&](double r) { return radial_laplacian(n, u.eval(r), r); }, alpha, n, grid);
  const double grad = lambda == 0.0 ? 0.0
                                    : weighted_integral([&](double r) { return u.eval(r).du; },
                                                        alpha + 2.0, n, grid);
  const double zero = mu == 0.0 ? 0.0
                                : weighted_integral([&](double r) { return u.eval(r).u; },
                                                    alpha + 4.0, n, grid);
  return lap - lambda * grad + mu * zero;
}

inline double norm_alpha(const RadialTestFunction& u, const ProblemParams& prm,
                         const QuadratureGrid& grid) {
  return norm_alpha(u, prm.n(), prm.alpha(), prm.lambda(), prm.mu(), grid);
}

namespace detail {

/// u~(r) = u(r^{1/tau}) with its first two derivatives.
inline RadialSample tau_scaled(const RadialTestFunction& u, double tau, double r) {
  const double s = std::pow(r, 1.0 / tau);
  const RadialSample b = u.eval(s);
  RadialSample out;
  out.u = b.u;
  out.du = b.du * std::pow(s, 1.0 - tau) / tau;
  out.d2u = (b.d2u * std::pow(s, 2.0 - 2.0 * tau) +
             (1.0 - tau) * b.du * std::pow(s, 1.0 - 2.0 * tau)) /
            (tau * tau);
  return out;
}

}  // namespace detail

inline IdentityReport verify_identity(IdentityId id, const RadialTestFunction& u, int n,
                                      double alpha, double lambda, double mu,
                                      const QuadratureGrid& grid) {
  if (n < 5 || !(alpha > -n && alpha < n - 4.0)) {
    std::ostringstream os;
    os << "verify_identity: requires n >= 5 and -n < alpha < n-4 (n=" << n
       << ", alpha=" << alpha << ")";
    throw Error(ErrorKind::Validation, os.str());
  }
  const double k = (n - 4.0 - alpha) / 2.0;  // (n-4-alpha)/2
  auto norm2 = [&](auto&& f, double w) { return weighted_integral(f, w, n, grid); };
  auto grad_w = [&](double w) {
    return norm2([&](double r) { return u.eval(r).du; }, w);
  };
  auto u_w = [&](double w) {
    return norm2([&](double r) { return u.eval(r).u; }, w);
  };
  auto t_a2 = [&]() {  // ||T_{alpha+2} u||^2_{alpha+2}
    return norm2([&](double r) { return t_operator(alpha + 2.0, n, u.eval(r), r); },
                 alpha + 2.0);
  };
  auto tt = [&]() {  // ||T_alpha T_{alpha+2} u||^2_alpha
    return norm2([&](double r) { return t_composite(alpha, n, u.eval(r), r); }, alpha);
  };

  IdentityReport rep;
  rep.id = id;
  switch (id) {
    case IdentityId::LaplacianSplit: {
      rep.lhs = norm2([&](double r) { return radial_laplacian(n, u.eval(r), r); }, alpha);
      rep.rhs = (n + alpha) * (n + alpha) / 4.0 * grad_w(alpha + 2.0) + k * k * t_a2() + tt();
      break;
    }
    case IdentityId::GradientSplit: {
      const double s = (n - 2.0 - alpha) / 2.0;
      rep.lhs = grad_w(alpha);
      rep.rhs = s * s * u_w(alpha + 2.0) +
                norm2(
                    [&](double r) {
                      const RadialSample v = u.eval(r);
                      return std::pow(r, s) * v.du + s * std::pow(r, s - 1.0) * v.u;
                    },
                    n - 2.0);
      break;
    }
    case IdentityId::TOperator: {
      rep.lhs = norm2(
          [&](double r) {
            const RadialSample v = u.eval(r);
            return std::pow(r, k) * v.du + k * std::pow(r, k - 1.0) * v.u;
          },
          n - 2.0);
      rep.rhs = t_a2();
      // Pointwise form |grad(r^k u)| = r^k |T_{alpha+2} u| on the grid nodes.
      double worst = 0.0;
      for (double t : grid.nodes) {
        const double r = std::exp(-t);
        const RadialSample v = u.eval(r);
        const double t1 = std::pow(r, k) * v.du;
        const double t2 = k * std::pow(r, k - 1.0) * v.u;
        const double a = std::abs(t1 + t2);
        const double b = std::pow(r, k) * std::abs(t_operator(alpha + 2.0, n, v, r));
        // Measured against the size of the individual terms, which cancel
        // where u decays algebraically.
        const double scale = std::abs(t1) + std::abs(t2);
        if (std::isfinite(a) && std::isfinite(b) && scale > 1e-200) {
          worst = std::max(worst, std::abs(a - b) / scale);
        }
      }
      rep.parts = {worst};
      break;
    }
    case IdentityId::ShiftedGradientSplit: {
      rep.lhs = grad_w(alpha + 2.0);
      rep.rhs = k * k * u_w(alpha + 4.0) + t_a2();
      break;
    }
    case IdentityId::NormDecomp: {
      rep.lhs = norm_alpha(u, n, alpha, lambda, mu, grid);
      const double c0 = mu + (n + alpha) * (n + alpha) * k * k / 4.0 - k * k * lambda;
      const double c1 = (n + alpha) * (n + alpha) / 4.0 - lambda + k * k;
      rep.rhs = c0 * u_w(alpha + 4.0) + c1 * t_a2() + tt();
      break;
    }
    case IdentityId::Hardy: {
      rep.lhs = grad_w(alpha + 2.0);
      rep.rhs = u_w(alpha + 4.0);
      rep.ratio = rep.lhs / rep.rhs;
      rep.constant = k * k;
      rep.rel_err = relative_error(rep.lhs, rep.rhs);
      rep.passed = rep.ratio >= rep.constant - 1e-9;
      return rep;
    }
    case IdentityId::TauScaling: {
      const double tau = 1.0 - alpha / (n - 4.0);
      const double q = 2.0 * n / (n - 4.0);
      auto ut = [&](double r) { return detail::tau_scaled(u, tau, r); };
      const double l1 = weighted_integral_raw(
          [&](double r) { return std::pow(std::abs(ut(r).u), q); }, 0.0, n, grid);
      const double r1 = tau * weighted_integral_raw(
                                  [&](double r) { return std::pow(std::abs(u.eval(r).u), q); },
                                  n * alpha / (n - 4.0), n, grid);
      const double l2 = norm2([&](double r) { return ut(r).du; }, 2.0);
      const double r2 = grad_w(alpha + 2.0) / tau;
      const double l3 = norm2([&](double r) { return ut(r).u; }, 4.0);
      const double r3 = tau * u_w(alpha + 4.0);
      const double l4 = norm2([&](double r) { return radial_laplacian(n, ut(r), r); }, 0.0);
      const double r4 = norm2(
                            [&](double r) {
                              const RadialSample v = u.eval(r);
                              return radial_laplacian(n, v, r) +
                                     (tau - 1.0) * (n - 2.0) * v.du / r;
                            },
                            alpha) /
                        (tau * tau * tau);
      rep.parts = {relative_error(l1, r1), relative_error(l2, r2), relative_error(l3, r3),
                   relative_error(l4, r4)};
      const std::size_t worst = static_cast<std::size_t>(
          std::max_element(rep.parts.begin(), rep.parts.end()) - rep.parts.begin());
      const double ls[] = {l1, l2, l3, l4};
      const double rs[] = {r1, r2, r3, r4};
      rep.lhs = ls[worst];
      rep.rhs = rs[worst];
      rep.rel_err = rep.parts[worst];
      rep.passed = rep.rel_err <= kIdentityTolerance;
      return rep;
    }
  }
  rep.rel_err = relative_error(rep.lhs, rep.rhs);
  if (id == IdentityId::TOperator) rep.rel_err = std::max(rep.rel_err, rep.parts.front());
  rep.passed = rep.rel_err <= kIdentityTolerance;
  return rep;
}

}  // namespace biharm
