#pragma once

// The reduced equation v'''' - K2 v'' + K0 v = v^p as a first-order system,
// its first integral, an adaptive Dormand-Prince 5(4) integrator with
// continuous output, and extremum detection on the resulting trajectory.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "biharm/error.hpp"
#include "biharm/params.hpp"

namespace biharm {

using State4 = std::array<double, 4>;

struct OdeState {
  double t = 0.0;
  State4 y{};  // (v, v', v'', v''')
};

inline State4 rhs(const State4& y, double K2, double K0, double p) {
  const double v = y[0];
  if (v < 0.0) {
    std::ostringstream os;
    os << "rhs: v must be nonnegative for v^p (v=" << v << ")";
    throw Error(ErrorKind::Domain, os.str());
  }
  return {y[1], y[2], y[3], std::pow(v, p) + K2 * y[2] - K0 * v};
}

inline State4 rhs(const OdeState& s, const OdeCoefficients& c) {
  return rhs(s.y, c.K2, c.K0, c.p);
}

/// E = -v'v''' + (v'')^2/2 + K2 (v')^2/2 - K0 v^2/2 + v^{p+1}/(p+1).
inline double energy(const State4& y, double K2, double K0, double p) {
  if (y[0] < 0.0) {
    throw Error(ErrorKind::Domain, "energy: v must be nonnegative");
  }
  return -y[1] * y[3] + 0.5 * y[2] * y[2] + 0.5 * K2 * y[1] * y[1] -
         0.5 * K0 * y[0] * y[0] + std::pow(y[0], p + 1.0) / (p + 1.0);
}

inline double energy(const State4& y, const OdeCoefficients& c) {
  return energy(y, c.K2, c.K0, c.p);
}

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

/// Continuous extension of one accepted step (Hairer's 4th-order dopri5
/// interpolant).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State4, 5> rcont{};

  [[nodiscard]] State4 eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    State4 out{};
    for (std::size_t i = 0; i < 4; ++i) {
      out[i] = rcont[0][i] +
               th * (rcont[1][i] +
                     th1 * (rcont[2][i] + th * (rcont[3][i] + th1 * rcont[4][i])));
    }
    return out;
  }

  [[nodiscard]] double t1() const { return t0 + h; }
};

struct Trajectory {
  std::vector<OdeState> states;
  std::vector<double> energies;
  StepStats step_stats;
  std::vector<DenseSegment> segments;  // segments[i] spans states[i]..states[i+1]
  OdeCoefficients coeffs{};
  bool stopped_early = false;

  [[nodiscard]] double t_begin() const { return states.front().t; }
  [[nodiscard]] double t_end() const { return states.back().t; }

  /// Dense-output state at any t inside the span.
  [[nodiscard]] State4 at(double t) const {
    if (segments.empty()) return states.front().y;
    const bool fwd = segments.front().h > 0.0;
    // Segments are ordered along the direction of integration.
    auto it = std::lower_bound(
        segments.begin(), segments.end(), t,
        [fwd](const DenseSegment& s, double x) { return fwd ? s.t1() < x : s.t1() > x; });
    if (it == segments.end()) it = std::prev(segments.end());
    return it->eval(t);
  }
};

struct IntegratorOptions {
  double tol = 1e-10;
  double h_min = 1e-14;
  double blowup = 1e12;
  std::size_t max_steps = 5'000'000;
  /// Checked after every accepted step; returning true ends the integration.
  std::function<bool(const OdeState&)> stop;
};

namespace dopri {

inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double a21 = 0.2, a31 = 3.0 / 40.0, a32 = 9.0 / 40.0,
                        a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0,
                        a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0,
                        a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0, a71 = 35.0 / 384.0,
                        a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;

// Step-size controller (PI / Lund stabilization).
inline constexpr double kSafe = 0.9;
inline constexpr double kFacMin = 0.2;
inline constexpr double kFacMax = 10.0;
inline constexpr double kBeta = 0.04;

}  // namespace dopri

/// Adaptive Dormand-Prince 5(4) integration of the reduced ODE from y0 to
/// t_end (either direction). Local error per step <= tol in the mixed
/// absolute/relative norm.
inline Trajectory integrate(const OdeState& y0, double t_end,
                            const OdeCoefficients& coeffs,
                            const IntegratorOptions& opt = {}) {
  using namespace dopri;
  if (!(opt.tol >= 1e-13 && opt.tol <= 1e-6)) {
    throw Error(ErrorKind::Domain, "integrate: tol must lie in [1e-13, 1e-6]");
  }
  for (double c : y0.y) {
    if (!std::isfinite(c)) {
      throw Error(ErrorKind::Domain, "integrate: initial state must be finite");
    }
  }
  Trajectory traj;
  traj.coeffs = coeffs;
  traj.states.push_back(y0);
  traj.energies.push_back(energy(y0.y, coeffs));
  if (t_end == y0.t) return traj;

  const double dir = t_end > y0.t ? 1.0 : -1.0;
  const double tol = opt.tol;
  auto f = [&](const State4& y) {
    ++traj.step_stats.rhs_evals;
    return rhs(y, coeffs.K2, coeffs.K0, coeffs.p);
  };
  auto scale = [&](double a, double b) {
    return tol + tol * std::max(std::abs(a), std::abs(b));
  };

  double t = y0.t;
  State4 y = y0.y;
  State4 k1 = f(y);

  // Initial step guess.
  double h;
  {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double sk = scale(y[i], y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, std::abs(t_end - t));
    State4 y1{};
    for (std::size_t i = 0; i < 4; ++i) y1[i] = y[i] + dir * h * k1[i];
    double der2 = 0.0;
    try {
      const State4 k2 = f(y1);
      for (std::size_t i = 0; i < 4; ++i) {
        const double sk = scale(y[i], y[i]);
        der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
      }
      der2 = std::sqrt(der2) / h;
    } catch (const Error&) {
      der2 = 0.0;
    }
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3)
                                     : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h, h1, std::abs(t_end - t)});
    h *= dir;
  }

  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t domain_rejects = 0;

  while ((t_end - t) * dir > 0.0) {
    if (traj.step_stats.accepted + traj.step_stats.rejected >= opt.max_steps) {
      throw IntegrationError(ErrorKind::NonConvergence, t,
                             "integrate: step budget exhausted");
    }
    if (std::abs(h) < opt.h_min) {
      std::ostringstream os;
      os << "integrate: step size underflow at t=" << t;
      throw IntegrationError(
          domain_rejects > 0 ? ErrorKind::Domain : ErrorKind::StepUnderflow, t,
          domain_rejects > 0 ? "integrate: solution left v >= 0 at t=" +
                                   std::to_string(t)
                             : os.str());
    }
    bool last = false;
    if ((t + 1.01 * h - t_end) * dir > 0.0) {
      h = t_end - t;
      last = true;
    }

    State4 k2, k3, k4, k5, k6, k7, ynew;
    try {
      State4 ys{};
      for (std::size_t i = 0; i < 4; ++i) ys[i] = y[i] + h * a21 * k1[i];
      k2 = f(ys);
      for (std::size_t i = 0; i < 4; ++i) ys[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = f(ys);
      for (std::size_t i = 0; i < 4; ++i)
        ys[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = f(ys);
      for (std::size_t i = 0; i < 4; ++i)
        ys[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = f(ys);
      for (std::size_t i = 0; i < 4; ++i)
        ys[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
      k6 = f(ys);
      for (std::size_t i = 0; i < 4; ++i)
        ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                              a75 * k5[i] + a76 * k6[i]);
      k7 = f(ynew);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Domain) throw;
      // A stage left v >= 0: retry with a smaller step.
      ++domain_rejects;
      ++traj.step_stats.rejected;
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double ee = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                             e6 * k6[i] + e7 * k7[i]);
      const double r = ee / scale(y[i], ynew[i]);
      err += r * r;
    }
    err = std::sqrt(err / 4.0);

    const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;

    if (!(err <= 1.0)) {
      ++traj.step_stats.rejected;
      h /= std::min(1.0 / kFacMin, std::isfinite(fac11) ? fac11 / kSafe : 1.0 / kFacMin);
      last_rejected = true;
      continue;
    }

    facold = std::max(err, 1e-4);
    ++traj.step_stats.accepted;
    domain_rejects = 0;

    DenseSegment seg;
    seg.t0 = t;
    seg.h = h;
    for (std::size_t i = 0; i < 4; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      seg.rcont[0][i] = y[i];
      seg.rcont[1][i] = ydiff;
      seg.rcont[2][i] = bspl;
      seg.rcont[3][i] = ydiff - h * k7[i] - bspl;
      seg.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                             d6 * k6[i] + d7 * k7[i]);
    }

    t = last ? t_end : t + h;
    y = ynew;
    k1 = k7;
    traj.segments.push_back(seg);
    traj.states.push_back({t, y});
    traj.energies.push_back(energy(y, coeffs));

    double ymax = 0.0;
    for (double c : y) ymax = std::max(ymax, std::abs(c));
    if (!(ymax <= opt.blowup)) {
      std::ostringstream os;
      os << "integrate: solution escaped |y| > " << opt.blowup
         << " at t=" << t;
      throw IntegrationError(ErrorKind::BlowUp, t, os.str());
    }
    if (opt.stop && opt.stop(traj.states.back())) {
      traj.stopped_early = true;
      break;
    }

    if (std::abs(hnew) > 0.0 && last_rejected) {
      hnew = dir * std::min(std::abs(hnew), std::abs(h));
    }
    last_rejected = false;
    h = hnew;
  }
  return traj;
}

inline Trajectory integrate(const OdeState& y0, double t_end, double tol,
                            const OdeCoefficients& coeffs) {
  IntegratorOptions opt;
  opt.tol = tol;
  return integrate(y0, t_end, coeffs, opt);
}

enum class ExtremumKind { Min, Max };

inline const char* to_string(ExtremumKind k) {
  return k == ExtremumKind::Min ? "min" : "max";
}

struct Extremum {
  double t = 0.0;
  ExtremumKind kind = ExtremumKind::Max;
  double v = 0.0;
  double v2 = 0.0;  // v'' at the root
  bool degenerate = false;
};

struct ExtremaResult {
  std::vector<Extremum> events;
  std::vector<std::string> warnings;
};

inline constexpr double kDegenerateCurvature = 1e-9;

/// Root of v' inside one dense segment, bracketed by [a, b] (in time).
inline double refine_root(const DenseSegment& seg, double a, double b,
                          double t_tol = 1e-13) {
  double ga = seg.eval(a)[1];
  for (int it = 0; it < 200 && std::abs(b - a) > t_tol; ++it) {
    const double mid = 0.5 * (a + b);
    const double gm = seg.eval(mid)[1];
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

/// Every root of v' in the trajectory span, located by bisection on the
/// continuous output (to ~1e-13 in t), classified by the sign of v''.
inline ExtremaResult detect_extrema(const Trajectory& traj) {
  ExtremaResult out;
  if (traj.states.empty()) return out;

  const State4& first = traj.states.front().y;
  const bool constant = std::all_of(
      traj.states.begin(), traj.states.end(),
      [&](const OdeState& s) { return s.y == first; });
  if (constant) return out;

  auto push = [&](double t, const State4& y) {
    Extremum e;
    e.t = t;
    e.v = y[0];
    e.v2 = y[2];
    e.kind = y[2] > 0.0 ? ExtremumKind::Min : ExtremumKind::Max;
    e.degenerate = std::abs(y[2]) < kDegenerateCurvature;
    if (e.degenerate) {
      std::ostringstream os;
      os << "degenerate extremum at t=" << t << " (|v''|=" << std::abs(y[2])
         << ")";
      out.warnings.push_back(os.str());
    }
    out.events.push_back(e);
  };

  if (first[1] == 0.0) push(traj.states.front().t, first);
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const double g0 = traj.states[i].y[1];
    const double g1 = traj.states[i + 1].y[1];
    if (g1 == 0.0) {
      if (g0 != 0.0) push(traj.states[i + 1].t, traj.states[i + 1].y);
      continue;
    }
    if (g0 == 0.0 || (g0 < 0.0) == (g1 < 0.0)) continue;
    const auto& seg = traj.segments[i];
    const double tr = refine_root(seg, traj.states[i].t, traj.states[i + 1].t);
    push(tr, seg.eval(tr));
  }
  return out;
}

}  // namespace biharm
