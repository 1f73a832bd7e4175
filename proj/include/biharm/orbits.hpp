#pragma once

// Periodic orbits through a prescribed minimum, the even homoclinic profile,
// and the removability verdict for the singularity at the origin.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biharm/error.hpp"
#include "biharm/ode.hpp"
#include "biharm/params.hpp"

namespace biharm {

struct PeriodicOrbit {
  double a = 0.0;  // minimum value, v(0)
  double b = 0.0;  // v''(0)
  double period = 0.0;
  double max_value = 0.0;
  double energy = 0.0;
  double residual_sup = 0.0;  // |v'''| at the matched extremum
  std::size_t iterations = 0;
  bool warm_started = false;
  /// K2^2 < 4 K0: existence/uniqueness is not covered by the known theory
  /// there, the result is still reported.
  bool outside_proven_regime = false;
  OdeCoefficients coeffs{};
};

struct PeriodicOptions {
  double tol = 1e-10;          // target |v'''(t*)|
  double integ_tol = 1e-12;
  std::optional<double> b_guess;
  int scan_points = 48;
  int max_expansions = 8;
  int max_iterations = 200;
  double t_max = 200.0;
};

/// Small-amplitude period about the constant solution l.
inline double linearized_period(const OdeCoefficients& c) {
  const double w2 =
      0.5 * (std::sqrt(c.K2 * c.K2 + 4.0 * (c.p - 1.0) * c.K0) - c.K2);
  return 2.0 * std::numbers::pi / std::sqrt(w2);
}

/// G(s) = s^{p+1}/(p+1) - K0 s^2/2, the potential part of the energy.
inline double potential(double s, const OdeCoefficients& c) {
  return std::pow(s, c.p + 1.0) / (c.p + 1.0) - 0.5 * c.K0 * s * s;
}

namespace detail {

/// One shot from (a, 0, b, 0) to the next extremum.
struct Shot {
  int sign = 0;           // -1 / +1
  bool finite = false;    // value is a genuine v'''(t*)
  double value = 0.0;
  double t_star = 0.0;
  double v_max = 0.0;
  double energy = 0.0;
};

inline Shot shoot_periodic(double a, double b, const OdeCoefficients& c,
                           const PeriodicOptions& opt, double v_escape) {
  IntegratorOptions io;
  io.tol = opt.integ_tol;
  io.stop = [&](const OdeState& s) { return s.y[1] <= 0.0 || s.y[0] > v_escape; };
  Shot out;
  Trajectory tr;
  try {
    tr = integrate({0.0, {a, 0.0, b, 0.0}}, opt.t_max, c, io);
  } catch (const IntegrationError& e) {
    out.sign = e.kind() == ErrorKind::Domain ? -1 : +1;
    return out;
  }
  const auto& last = tr.states.back();
  if (!tr.stopped_early || last.y[0] > v_escape) {
    out.sign = +1;
    return out;
  }
  // Locate v' = 0 on the last step by bisection on the dense output.
  const DenseSegment& seg = tr.segments.back();
  double left = seg.t0;
  if (!(seg.eval(left)[1] > 0.0)) {
    // First step: v' starts at 0, find an interior point where it is positive.
    double th = 0.5;
    while (th > 1e-12 && !(seg.eval(seg.t0 + th * seg.h)[1] > 0.0)) th *= 0.5;
    if (!(th > 1e-12)) {
      out.sign = -1;
      return out;
    }
    left = seg.t0 + th * seg.h;
  }
  const double ts = refine_root(seg, left, seg.t1(), 1e-15);
  const State4 ys = seg.eval(ts);
  out.finite = true;
  out.value = ys[3];
  out.sign = ys[3] > 0.0 ? +1 : -1;
  out.t_star = ts;
  out.v_max = ys[0];
  out.energy = energy({a, 0.0, b, 0.0}, c);
  return out;
}

}  // namespace detail

/// Periodic solution with minimum value a: shooting on b = v''(0) from
/// (a, 0, b, 0) so that v''' vanishes at the next extremum t*; the period is
/// 2 t* by evenness about extrema.
inline PeriodicOrbit find_periodic(double a, const OdeCoefficients& c,
                                   const PeriodicOptions& opt = {}) {
  if (!(c.K0 > 0.0)) {
    throw Error(ErrorKind::Regime, "find_periodic: requires K0 > 0");
  }
  const double l = std::pow(c.K0, 1.0 / (c.p - 1.0));
  if (!(a > 0.0 && a < l)) {
    std::ostringstream os;
    os.precision(17);
    os << "find_periodic: minimum value a must satisfy 0 < a < l = " << l
       << " (got " << a << ")";
    throw Error(ErrorKind::Domain, os.str());
  }
  // Energy level 0 bounds v'' at the minimum for every bounded orbit we look
  // for; G(a) < 0 on (0, l).
  const double b_cap0 = std::sqrt(-2.0 * potential(a, c));
  const double p_max = std::pow(c.K0 * (c.p + 1.0) / 2.0, 1.0 / (c.p - 1.0));
  const double v_escape = 2.0 * p_max;

  PeriodicOrbit orb;
  orb.a = a;
  orb.coeffs = c;
  orb.outside_proven_regime = c.K2 * c.K2 < 4.0 * c.K0;

  auto shot = [&](double b) {
    ++orb.iterations;
    return detail::shoot_periodic(a, b, c, opt, v_escape);
  };

  // Bracket [lo, hi] with f(lo) < 0 < f(hi).
  std::optional<std::pair<double, detail::Shot>> lo, hi;

  if (opt.b_guess && *opt.b_guess > 0.0) {
    double f = 1.05;
    for (int k = 0; k < 12 && !(lo && hi); ++k, f *= 1.6) {
      const double bl = *opt.b_guess / f, bh = *opt.b_guess * f;
      if (!lo) {
        auto s = shot(bl);
        if (s.sign < 0) lo = {bl, s};
      }
      if (!hi) {
        auto s = shot(bh);
        if (s.sign > 0) hi = {bh, s};
      }
    }
    orb.warm_started = lo && hi;
    if (!orb.warm_started) lo.reset(), hi.reset();
  }

  if (!(lo && hi)) {
    double b_cap = b_cap0;
    const double b_min = 1e-6;
    for (int e = 0; e <= opt.max_expansions && !(lo && hi); ++e, b_cap *= 2.0) {
      if (!(b_cap > b_min)) continue;
      const int n = opt.scan_points;
      std::optional<std::pair<double, detail::Shot>> prev;
      for (int i = 0; i < n; ++i) {
        const double b = b_min * std::pow(b_cap / b_min, double(i) / (n - 1));
        auto s = shot(b);
        if (prev && prev->second.sign < 0 && s.sign > 0) {
          lo = prev;
          hi = {b, s};
          break;
        }
        prev = {b, s};
      }
    }
    if (!(lo && hi)) {
      std::ostringstream os;
      os << "find_periodic: no sign change of the matching function v'''(t*) "
            "for b in [1e-6, "
         << b_cap0 * std::pow(2.0, opt.max_expansions) << "]";
      throw Error(ErrorKind::BracketFailure, os.str());
    }
  }

  // Bisection, with a secant step whenever both ends carry real values.
  for (int it = 0; it < opt.max_iterations; ++it) {
    const auto& [bl, sl] = *lo;
    const auto& [bh, sh] = *hi;
    if (std::abs(sl.value) < opt.tol && sl.finite) {
      hi = lo;
      break;
    }
    if (sh.finite && std::abs(sh.value) < opt.tol) {
      lo = hi;
      break;
    }
    double bm = 0.5 * (bl + bh);
    if (sl.finite && sh.finite) {
      const double sec = bl - sl.value * (bh - bl) / (sh.value - sl.value);
      const double w = bh - bl;
      if (sec > bl + 0.05 * w && sec < bh - 0.05 * w) bm = sec;
    }
    if (!(bm > bl && bm < bh)) {
      // The bracket cannot be split further in double precision.
      break;
    }
    auto sm = shot(bm);
    if (sm.sign < 0) {
      lo = {bm, sm};
    } else {
      hi = {bm, sm};
    }
    if (it + 1 == opt.max_iterations) {
      throw Error(ErrorKind::NonConvergence,
                  "find_periodic: matching iteration did not converge");
    }
  }

  const auto& best = (lo->second.finite &&
                      (!hi->second.finite ||
                       std::abs(lo->second.value) <= std::abs(hi->second.value)))
                         ? *lo
                         : *hi;
  if (!best.second.finite || !(std::abs(best.second.value) < opt.tol)) {
    std::ostringstream os;
    os << "find_periodic: matching residual "
       << (best.second.finite ? std::abs(best.second.value)
                              : std::numeric_limits<double>::infinity())
       << " above tolerance " << opt.tol;
    throw Error(ErrorKind::NonConvergence, os.str());
  }
  orb.b = best.first;
  orb.period = 2.0 * best.second.t_star;
  orb.max_value = best.second.v_max;
  orb.energy = best.second.energy;
  orb.residual_sup = std::abs(best.second.value);
  return orb;
}

inline PeriodicOrbit find_periodic(double a, const ProblemParams& prm,
                                   const PeriodicOptions& opt = {}) {
  return find_periodic(a, derive_coefficients(prm).ode(), opt);
}

/// Re-integrates an orbit over `periods` periods from its minimum.
///
/// The orbit is linearly unstable (a real Floquet exponent of order
/// sqrt(K2)), so one continuous run drifts off it after a couple of periods
/// and eventually leaves v >= 0. Each period is therefore integrated from the
/// anchor state (a, 0, b, 0) and the pieces are concatenated. At a seam the
/// stored state is the anchor; the previous piece's end state (off by the
/// drift accumulated over one period) is dropped.
inline Trajectory integrate_orbit(const PeriodicOrbit& orb, double periods,
                                  double tol = 1e-10) {
  if (!(periods >= 0.0) || !std::isfinite(periods)) {
    throw Error(ErrorKind::Domain, "integrate_orbit: periods must be finite and >= 0");
  }
  const State4 anchor{orb.a, 0.0, orb.b, 0.0};
  const double T = orb.period;
  Trajectory out = integrate({0.0, anchor}, std::min(periods, 1.0) * T, tol, orb.coeffs);
  for (int k = 1; k < periods; ++k) {
    const double shift = k * T;
    const double span = std::min(periods - k, 1.0) * T;
    Trajectory piece = integrate({0.0, anchor}, span, tol, orb.coeffs);
    out.states.pop_back();
    out.energies.pop_back();
    for (std::size_t i = 0; i < piece.states.size(); ++i) {
      OdeState s = piece.states[i];
      s.t += shift;
      out.states.push_back(s);
      out.energies.push_back(piece.energies[i]);
    }
    for (DenseSegment seg : piece.segments) {
      seg.t0 += shift;
      out.segments.push_back(seg);
    }
    out.step_stats.accepted += piece.step_stats.accepted;
    out.step_stats.rejected += piece.step_stats.rejected;
    out.step_stats.rhs_evals += piece.step_stats.rhs_evals;
  }
  return out;
}

struct HomoclinicProfile {
  double peak = 0.0;
  double v2_at_peak = 0.0;  // v''(0)
  double decay_rate = 0.0;
  double horizon = 0.0;     // t range over which the profile is trusted
  double shoot_time = 0.0;  // 40/|lambda4|
  Trajectory samples;       // uniform resampling on [0, horizon]
  OdeCoefficients coeffs{};
};

struct HomoclinicOptions {
  double integ_tol = 1e-12;
  int scan_points = 64;
  double horizon_divergence = 1e-5;
  std::size_t samples = 2001;
};

namespace detail {

inline double zero_energy_curvature(double P, const OdeCoefficients& c) {
  const double q = c.K0 * P * P - 2.0 * std::pow(P, c.p + 1.0) / (c.p + 1.0);
  return -std::sqrt(std::max(q, 0.0));
}

/// +1 if v turns back up, -1 if it crosses zero, 0 if neither before t_max.
inline int homoclinic_class(double P, const OdeCoefficients& c, double t_max,
                            double tol, Trajectory* keep = nullptr) {
  IntegratorOptions io;
  io.tol = tol;
  io.blowup = 1e12;
  io.stop = [](const OdeState& s) { return s.t > 0.0 && (s.y[1] > 0.0 || s.y[0] < 0.0); };
  try {
    Trajectory tr = integrate({0.0, {P, 0.0, zero_energy_curvature(P, c), 0.0}},
                              t_max, c, io);
    const auto& y = tr.states.back().y;
    int cls = 0;
    if (tr.stopped_early) cls = y[1] > 0.0 ? +1 : -1;
    if (keep) *keep = std::move(tr);
    return cls;
  } catch (const IntegrationError& e) {
    if (e.kind() == ErrorKind::Domain) return -1;
    if (e.kind() == ErrorKind::BlowUp) return +1;
    throw;
  }
}

}  // namespace detail

/// Even decaying solution with v'(0) = v'''(0) = 0 and zero energy. Shooting
/// on the peak P = v(0) in (l, P_max], with v''(0) fixed by E = 0.
inline HomoclinicProfile find_homoclinic(const OdeCoefficients& c,
                                         const HomoclinicOptions& opt = {}) {
  if (!(c.K2 > 0.0) || !(c.K0 > 0.0)) {
    throw Error(ErrorKind::Regime,
                "find_homoclinic: requires K2 > 0 and K0 > 0");
  }
  const double disc = c.K2 * c.K2 - 4.0 * c.K0;
  if (disc < 0.0) {
    std::ostringstream os;
    os << "find_homoclinic: requires K2^2 - 4K0 >= 0 (got " << disc << ")";
    throw Error(ErrorKind::Regime, os.str());
  }
  const auto d = derive_coefficients(c);
  const double slow = d.real_lam(2);  // |lambda4|
  const double l = std::pow(c.K0, 1.0 / (c.p - 1.0));
  const double p_max = std::pow(c.K0 * (c.p + 1.0) / 2.0, 1.0 / (c.p - 1.0));

  HomoclinicProfile prof;
  prof.coeffs = c;
  prof.shoot_time = 40.0 / slow;
  const double t_max = prof.shoot_time;

  // Scan downward from P_max for the first class change.
  std::optional<std::pair<double, int>> prev;
  double lo = 0.0, hi = 0.0;
  int cls_lo = 0, cls_hi = 0;
  bool found = false;
  for (int i = 0; i < opt.scan_points && !found; ++i) {
    const double P = p_max - (p_max - l) * double(i) / opt.scan_points;
    const int cls = detail::homoclinic_class(P, c, t_max, opt.integ_tol);
    if (cls == 0) continue;
    if (prev && prev->second != cls) {
      lo = P;
      cls_lo = cls;
      hi = prev->first;
      cls_hi = prev->second;
      found = true;
    }
    prev = {P, cls};
  }
  if (!found) {
    throw Error(ErrorKind::BracketFailure,
                "find_homoclinic: no change of behaviour found for the peak "
                "value in (l, P_max]");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi) || hi - lo <= 1e-15 * hi) break;
    const int cls = detail::homoclinic_class(mid, c, t_max, opt.integ_tol);
    if (cls == cls_lo) {
      lo = mid;
    } else if (cls == cls_hi) {
      hi = mid;
    } else {
      // Neither behaviour before t_max: mid is as good as the bracket gets.
      lo = hi = mid;
      break;
    }
  }
  prof.peak = 0.5 * (lo + hi);
  prof.v2_at_peak = detail::zero_energy_curvature(prof.peak, c);

  // Trust the profile up to where the two bracket ends separate.
  auto run = [&](double P) {
    IntegratorOptions io;
    io.tol = opt.integ_tol;
    io.stop = [](const OdeState& s) {
      return s.t > 0.0 && (s.y[1] > 0.0 || s.y[0] < 0.0);
    };
    return integrate({0.0, {P, 0.0, detail::zero_energy_curvature(P, c), 0.0}},
                     t_max, c, io);
  };
  Trajectory tlo, thi, tmid;
  auto safe_run = [&](double P, Trajectory& out) {
    try {
      out = run(P);
    } catch (const IntegrationError& e) {
      // The failure time bounds the usable span.
      IntegratorOptions io;
      io.tol = opt.integ_tol;
      out = integrate({0.0, {P, 0.0, detail::zero_energy_curvature(P, c), 0.0}},
                      0.999 * e.time(), c, io);
    }
  };
  safe_run(lo, tlo);
  safe_run(hi, thi);
  safe_run(prof.peak, tmid);
  double horizon = std::min({tlo.t_end(), thi.t_end(), tmid.t_end()});
  {
    const int probes = 4000;
    for (int i = 1; i <= probes; ++i) {
      const double t = horizon * i / probes;
      const double a = tlo.at(t)[0];
      const double b = thi.at(t)[0];
      const double m = tmid.at(t)[0];
      if (std::abs(a - b) > opt.horizon_divergence * std::abs(m) || m <= 0.0) {
        horizon = horizon * (i - 1) / probes;
        break;
      }
    }
  }
  if (!(horizon > 0.0)) {
    throw Error(ErrorKind::NonConvergence,
                "find_homoclinic: profile could not be resolved beyond t = 0");
  }
  prof.horizon = horizon;

  Trajectory& s = prof.samples;
  s.coeffs = c;
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const double t = horizon * double(i) / double(opt.samples - 1);
    OdeState st{t, tmid.at(t)};
    s.states.push_back(st);
    s.energies.push_back(energy(st.y, c));
  }
  s.step_stats = tmid.step_stats;

  // Least squares slope of ln v on the trailing 20% of the samples.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  const std::size_t first = s.states.size() - s.states.size() / 5;
  for (std::size_t i = first; i < s.states.size(); ++i) {
    const double v = s.states[i].y[0];
    if (v < 1e-12) continue;
    const double x = s.states[i].t;
    const double y = std::log(v);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) {
    throw Error(ErrorKind::NonConvergence,
                "find_homoclinic: too few samples above 1e-12 to fit decay");
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  prof.decay_rate = -slope;
  return prof;
}

inline HomoclinicProfile find_homoclinic(const ProblemParams& prm,
                                         const HomoclinicOptions& opt = {}) {
  return find_homoclinic(derive_coefficients(prm).ode(), opt);
}

enum class Verdict { Removable, NonRemovable, Boundary };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Removable: return "Removable";
    case Verdict::NonRemovable: return "NonRemovable";
    case Verdict::Boundary: return "Boundary";
  }
  return "Boundary";
}

struct SingularityVerdict {
  Verdict verdict = Verdict::Boundary;
  /// (n-4-alpha)/2 - (-lambda4): positive when v decays slower than the
  /// rate needed for u(0) to stay finite.
  double rate_gap = 0.0;
  double lambda4 = 0.0;
  double threshold = 0.0;  // (n-4-alpha)/2
  /// -n < alpha <= -2 and lambda > (n-2)(2+alpha) + 2 sqrt(mu), the setting
  /// in which the origin is known to be a non-removable singularity.
  bool singular_hypothesis = false;
};

inline constexpr double kBoundaryGap = 1e-12;

inline SingularityVerdict classify_singularity(const ProblemParams& prm) {
  const auto d = derive_coefficients(prm);
  if (!d.eigenvalues_real) {
    throw Error(ErrorKind::Regime,
                "classify_singularity: eigenvalues of r^4 - K2 r^2 + K0 are not "
                "real (K2^2 - 4K0 < 0 or negative roots)");
  }
  SingularityVerdict out;
  out.lambda4 = d.real_lam(4);
  out.threshold = prm.ef_exponent();
  out.rate_gap = out.threshold + out.lambda4;
  if (std::abs(out.rate_gap) <= kBoundaryGap) {
    out.verdict = Verdict::Boundary;
  } else {
    out.verdict = out.rate_gap > 0.0 ? Verdict::NonRemovable : Verdict::Removable;
  }
  const double n = prm.n();
  const double a = prm.alpha();
  const double mu = prm.mu();
  out.singular_hypothesis = a > -n && a <= -2.0 && mu >= 0.0 &&
                            prm.lambda() > (n - 2.0) * (2.0 + a) + 2.0 * std::sqrt(mu);
  return out;
}

}  // namespace biharm
