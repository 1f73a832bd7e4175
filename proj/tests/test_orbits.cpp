#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "biharm/orbits.hpp"

using namespace biharm;

namespace {

const OdeCoefficients kB0{10.0, 9.0, 5.0};
const double kL = std::sqrt(3.0);

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Usage;
}

}  // namespace

// Reference orbits from an independent shooting run (scipy DOP853, rtol 1e-13,
// bisection on v''' at the first maximum).
TEST(Periodic, MatchesReferenceOrbits) {
  struct Ref {
    double a, b, T, vmax;
  };
  for (const Ref& r : {Ref{0.5, 0.48227822401695764, 5.7566406924589115, 2.1915609452570575},
                       Ref{1.0, 0.7836654928915203, 4.437135754761625, 2.1120094268557255},
                       Ref{1.5, 0.4982398084021, 3.8331899955143545, 1.9136137760619036}}) {
    const auto orb = find_periodic(r.a, kB0);
    EXPECT_NEAR(orb.b, r.b, 1e-8) << r.a;
    EXPECT_NEAR(orb.period, r.T, 1e-8) << r.a;
    EXPECT_NEAR(orb.max_value, r.vmax, 1e-8) << r.a;
    EXPECT_LT(orb.residual_sup, 1e-8);
    EXPECT_FALSE(orb.outside_proven_regime);
  }
}

TEST(Periodic, LinearizedLimit) {
  // 2 pi / omega with omega^2 = (sqrt(K2^2 + 4(p-1)K0) - K2)/2 = sqrt 61 - 5.
  const double oracle = 2.0 * std::numbers::pi / std::sqrt(std::sqrt(61.0) - 5.0);
  EXPECT_NEAR(linearized_period(kB0), oracle, 1e-14);
  EXPECT_NEAR(oracle, 3.7480, 1e-4);
  const auto orb = find_periodic(kL - 1e-3, kB0);
  EXPECT_NEAR(orb.period, oracle, 1e-2);
}

TEST(Periodic, EnergyConservedOverThreePeriods) {
  const auto orb = find_periodic(1.0, kB0);
  const auto tr = integrate_orbit(orb, 3.0, 1e-10);
  const double e0 = tr.energies.front();
  for (double e : tr.energies) EXPECT_LE(std::abs(e - e0), 1e-8);
  EXPECT_NEAR(tr.t_end(), 3.0 * orb.period, 1e-12);
}

TEST(Periodic, SingleRunDriftsOffUnstableOrbit) {
  // Linearizing about l gives r^4 - 10 r^2 - 36 = 0, a real exponent near
  // 3.58; round-off is amplified by ~e^47 over three periods.
  const auto orb = find_periodic(1.0, kB0);
  EXPECT_THROW(integrate(OdeState{0.0, {orb.a, 0.0, orb.b, 0.0}}, 3.0 * orb.period, 1e-10, kB0),
               IntegrationError);
}

TEST(Periodic, StitchedTrajectoryIsContinuous) {
  const auto orb = find_periodic(1.0, kB0);
  const auto tr = integrate_orbit(orb, 2.5, 1e-10);
  EXPECT_NEAR(tr.t_end(), 2.5 * orb.period, 1e-12);
  ASSERT_EQ(tr.segments.size() + 1, tr.states.size());
  for (std::size_t i = 1; i < tr.states.size(); ++i) EXPECT_GT(tr.states[i].t, tr.states[i - 1].t);
  // Seams sit at whole periods; the dense output on either side agrees.
  for (int k = 1; k <= 2; ++k) {
    const double t = k * orb.period;
    const auto left = tr.at(t - 1e-9);
    const auto right = tr.at(t + 1e-9);
    EXPECT_NEAR(left[0], right[0], 1e-5);
    EXPECT_NEAR(right[0], orb.a, 1e-7);
  }
}

TEST(Periodic, ReturnsToStartAfterOnePeriod) {
  const auto orb = find_periodic(1.0, kB0);
  const auto tr = integrate_orbit(orb, 1.0, 1e-12);
  const auto& y = tr.states.back().y;
  EXPECT_NEAR(y[0], 1.0, 1e-7);
  EXPECT_NEAR(y[1], 0.0, 1e-7);
  EXPECT_NEAR(y[2], orb.b, 1e-6);
  EXPECT_NEAR(y[3], 0.0, 1e-6);
}

TEST(Periodic, ExtremaOverTwoPeriods) {
  const auto orb = find_periodic(1.0, kB0);
  const auto tr = integrate_orbit(orb, 2.0, 1e-12);
  const auto ex = detect_extrema(tr);
  int mins = 0, maxs = 0;
  for (const auto& e : ex.events) {
    if (e.t >= 2.0 * orb.period - 0.1) continue;
    if (e.kind == ExtremumKind::Min) {
      ++mins;
      EXPECT_NEAR(e.v, 1.0, 1e-7);
    } else {
      ++maxs;
      EXPECT_NEAR(e.v, orb.max_value, 1e-7);
    }
  }
  EXPECT_EQ(mins, 2);
  EXPECT_EQ(maxs, 2);
}

TEST(Periodic, WarmStartAgrees) {
  const auto cold = find_periodic(1.0, kB0);
  PeriodicOptions opt;
  opt.b_guess = cold.b * 1.05;
  const auto warm = find_periodic(1.0, kB0, opt);
  EXPECT_TRUE(warm.warm_started);
  EXPECT_NEAR(warm.period, cold.period, 1e-9);
}

TEST(Periodic, PeriodDecreasesAlongSweep) {
  // Regression observation on B0, not a proven property.
  double prev = INFINITY;
  for (int i = 0; i < 20; ++i) {
    const double a = 0.1 + (kL - 0.001 - 0.1) * i / 19.0;
    const double T = find_periodic(a, kB0).period;
    EXPECT_LT(T, prev) << "a=" << a;
    prev = T;
  }
}

TEST(Periodic, ArgumentErrors) {
  EXPECT_EQ(kind_of([] { find_periodic(kL, kB0); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { find_periodic(0.0, kB0); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { find_periodic(0.5, OdeCoefficients{10.0, -1.0, 5.0}); }),
            ErrorKind::Regime);
}

TEST(Periodic, ParamsOverloadUsesDerivedCoefficients) {
  const auto orb = find_periodic(1.0, ProblemParams::create(6, 0.0, 5.0, 0.0, 0.0));
  EXPECT_NEAR(orb.period, 4.437135754761625, 1e-8);
}

TEST(Homoclinic, BaselineRecoversClosedForm) {
  const auto h = find_homoclinic(kB0);
  EXPECT_NEAR(h.peak, std::pow(24.0, 0.25), 1e-6);
  EXPECT_NEAR(h.decay_rate, 1.0, 1e-3);
  EXPECT_LT(h.v2_at_peak, 0.0);
  EXPECT_GT(h.horizon, 3.0);
  // Samples track 24^{1/4} sech t within the trusted horizon.
  for (const auto& st : h.samples.states) {
    EXPECT_NEAR(st.y[0], std::pow(24.0, 0.25) / std::cosh(st.t), 1e-5) << st.t;
  }
}

TEST(Homoclinic, ShiftedLambdaInstance) {
  const auto h = find_homoclinic(ProblemParams::create(6, 0.0, 5.0, 80.0 / 9.0, 0.0));
  EXPECT_NEAR(h.peak, std::pow(24.0 / 81.0, 0.25), 1e-6);
  EXPECT_NEAR(h.decay_rate, 1.0 / 3.0, 1e-3);
}

TEST(Homoclinic, PeakOnZeroEnergyLevel) {
  // Peaks satisfy E = 0 with v' = v''' = 0, which forces v(0) > l.
  for (double K2 : {5.0, 6.0, 12.0}) {
    const OdeCoefficients c{K2, 4.0, 3.0};
    const auto h = find_homoclinic(c);
    EXPECT_GT(h.peak, std::sqrt(4.0));
    const double e = energy(State4{h.peak, 0.0, h.v2_at_peak, 0.0}, c);
    EXPECT_NEAR(e, 0.0, 1e-9);
    // Decay rate matches the slow eigenvalue. The log-linear fit window still
    // carries the faster mode, hence the loose relative tolerance.
    const double lam2 = std::sqrt((K2 - std::sqrt(K2 * K2 - 16.0)) / 2.0);
    EXPECT_NEAR(h.decay_rate / lam2, 1.0, 1e-2) << K2;
  }
}

TEST(Homoclinic, RegimeErrors) {
  EXPECT_EQ(kind_of([] { find_homoclinic(OdeCoefficients{-1.0, 1.0, 5.0}); }), ErrorKind::Regime);
  EXPECT_EQ(kind_of([] { find_homoclinic(OdeCoefficients{10.0, -1.0, 5.0}); }), ErrorKind::Regime);
  EXPECT_EQ(kind_of([] { find_homoclinic(OdeCoefficients{1.0, 4.0, 5.0}); }), ErrorKind::Regime);
}

TEST(Singularity, ReferenceVerdicts) {
  const auto nr = classify_singularity(ProblemParams::create(6, -4.0, 5.0, 0.0, 0.0, 12.0));
  EXPECT_EQ(nr.verdict, Verdict::NonRemovable);
  EXPECT_NEAR(nr.lambda4, -1.0, 1e-14);
  EXPECT_NEAR(nr.threshold, 3.0, 1e-15);
  EXPECT_NEAR(nr.rate_gap, 2.0, 1e-14);
  EXPECT_TRUE(nr.singular_hypothesis);

  const auto bd = classify_singularity(ProblemParams::create(6, 0.0, 5.0, 0.0, 0.0));
  EXPECT_EQ(bd.verdict, Verdict::Boundary);
  EXPECT_NEAR(bd.rate_gap, 0.0, 1e-15);

  // lambda = -100 alone also lands on the boundary; mu = 1 moves it off.
  const auto rm = classify_singularity(ProblemParams::create(6, 0.0, 5.0, -100.0, 1.0));
  EXPECT_EQ(rm.verdict, Verdict::Removable);
  EXPECT_LT(rm.rate_gap, 0.0);
}

TEST(Singularity, ComplexEigenvaluesAreRegimeError) {
  EXPECT_EQ(kind_of([] { classify_singularity(ProblemParams::create(6, 0.0, 5.0, 8.0, 3.0)); }),
            ErrorKind::Regime);
}

TEST(Singularity, HypothesisImpliesNonRemovable) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int hits = 0;
  for (int i = 0; i < 400; ++i) {
    const int n = 5 + static_cast<int>(u(rng) * 5);
    const double alpha = -n + 0.05 + (n - 2.05) * u(rng);  // (-n, -2]
    const double mu = 2.0 * u(rng);
    const double lambda = (n - 2.0) * (2.0 + alpha) + 2.0 * std::sqrt(mu) + 0.01 + 30.0 * u(rng);
    const auto prm = ProblemParams::create(n, alpha, 3.0, lambda, mu);
    if (!derive_coefficients(prm).eigenvalues_real) continue;
    const auto v = classify_singularity(prm);
    ASSERT_TRUE(v.singular_hypothesis);
    EXPECT_EQ(v.verdict, Verdict::NonRemovable)
        << "n=" << n << " alpha=" << alpha << " lambda=" << lambda << " mu=" << mu;
    ++hits;
  }
  EXPECT_GT(hits, 100);
}
