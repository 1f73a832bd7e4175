#include <gtest/gtest.h>

#include <cmath>

#include "biharm/closed_form.hpp"

using namespace biharm;

namespace {

double max_residual(const CoshSolution& s, double p) {
  double worst = 0.0;
  for (int i = 0; i <= 2400; ++i) {
    const double t = -12.0 + 0.01 * i;
    const auto v = eval_v_all(s, t);
    const double r = ode_residual([&](double x) { return eval_v_all(s, x); }, t, s.coeffs.K2,
                                  s.coeffs.K0, p);
    worst = std::max(worst, std::abs(r) / std::max(1.0, std::pow(v[0], p)));
  }
  return worst;
}

}  // namespace

TEST(ClosedForm, BaselineIsCase1) {
  const auto s = build_cosh_solution(ProblemParams::create(6, 0.0, 5.0, 0.0, 0.0));
  EXPECT_EQ(s.case_tag, SolutionCase::Case1);
  EXPECT_NEAR(s.m, -1.0, 1e-15);
  EXPECT_NEAR(s.nu, 1.0, 1e-15);
  EXPECT_NEAR(s.C, 2.21336383940064318481758054688, 1e-14);  // 24^{1/4}
  EXPECT_NEAR(s.gamma_decay, 0.0, 1e-15);
  EXPECT_LE(max_residual(s, 5.0), 1e-8);
}

TEST(ClosedForm, WeightedInstanceIsCase2) {
  const auto s = build_cosh_solution(ProblemParams::create(6, -4.0, 5.0, 0.0, 0.0, 12.0));
  EXPECT_EQ(s.case_tag, SolutionCase::Case2);
  EXPECT_NEAR(s.C, 2.21336383940064318481758054688, 1e-14);
  EXPECT_LE(max_residual(s, 5.0), 1e-8);
}

TEST(ClosedForm, ShiftedLambdaInstance) {
  const auto s = build_cosh_solution(ProblemParams::create(6, 0.0, 5.0, 80.0 / 9.0, 0.0));
  EXPECT_NEAR(s.nu, 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(s.C, 0.737787946466881061605860182294, 1e-14);  // (24/81)^{1/4}
  EXPECT_LE(max_residual(s, 5.0), 1e-8);
}

TEST(ClosedForm, BubbleConstantAtDimensionSix) {
  const ProblemParams prm = ProblemParams::create(6, 0.0, 5.0, 0.0, 0.0);
  const auto s = build_cosh_solution(prm);
  const double target = std::pow(4.0 * 2.0 * 6.0 * 8.0, 0.25);  // 384^{1/4}
  EXPECT_NEAR(2.0 * s.C / target, 1.0, 1e-10);
  // u(r) -> C / 2^m at the origin when the decay exponent vanishes.
  const EmdenFowlerMap map(prm);
  EXPECT_NEAR(eval_u(s, map, 1e-8) / target, 1.0, 1e-10);
}

TEST(ClosedForm, ResidualOnSyntheticFamily) {
  // Any K2 > 0 with K0 on the explicit relation carries a cosh-power solution.
  for (double p : {1.5, 2.0, 3.0, 5.0, 7.0}) {
    for (double K2 : {0.5, 2.0, 10.0}) {
      const OdeCoefficients c{K2, K2 * K2 / explicit_ratio(p), p};
      const auto s = build_cosh_solution(c);
      EXPECT_EQ(s.case_tag, SolutionCase::Generic);
      EXPECT_LE(max_residual(s, p), 1e-8) << "p=" << p << " K2=" << K2;
    }
  }
}

TEST(ClosedForm, DerivativesMatchFiniteDifferences) {
  const auto s = build_cosh_solution(ProblemParams::create(7, 0.5, explicit_case_p(ExplicitCase::Case1, 7, 0.5),
                                                           0.0, 0.0, 0.5));
  const double h = 1e-4;
  for (double t : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
    for (int k = 0; k < 4; ++k) {
      const double fd = (eval_v(s, t + h, k) - eval_v(s, t - h, k)) / (2.0 * h);
      EXPECT_NEAR(fd, eval_v(s, t, k + 1), 1e-6 * std::max(1.0, std::abs(fd))) << t << " " << k;
    }
  }
}

TEST(ClosedForm, EvenInT) {
  const auto s = build_cosh_solution(ProblemParams::create(6, 0.0, 5.0, 0.0, 0.0));
  for (double t : {0.3, 1.7, 9.0}) {
    EXPECT_DOUBLE_EQ(eval_v(s, t, 0), eval_v(s, -t, 0));
    EXPECT_DOUBLE_EQ(eval_v(s, t, 1), -eval_v(s, -t, 1));
  }
}

TEST(ClosedForm, OffRelationHasNoExplicitSolution) {
  try {
    build_cosh_solution(ProblemParams::create(6, 0.0, 5.0, 3.0, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoExplicitSolution);
  }
  try {
    build_cosh_solution(OdeCoefficients{-1.0, 1.0, 5.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoExplicitSolution);
  }
}

TEST(ClosedForm, DerivativeOrderChecked) {
  const auto s = build_cosh_solution(OdeCoefficients{10.0, 9.0, 5.0});
  EXPECT_THROW(eval_v(s, 0.0, 5), Error);
  EXPECT_THROW(eval_v(s, 0.0, -1), Error);
}

TEST(ClosedForm, NoOverflowFarOut) {
  const auto s = build_cosh_solution(OdeCoefficients{10.0, 9.0, 5.0});
  const double v = eval_v(s, 800.0, 0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GE(v, 0.0);
}

TEST(EmdenFowler, RoundTripIsIdentity) {
  const EmdenFowlerMap map(7, 0.5);
  auto u = [](double r) { return std::exp(-r * r) * (1.0 + r); };
  for (double r : {1e-3, 0.1, 0.9, 2.0, 4.0}) {
    EXPECT_NEAR(emden_fowler_roundtrip(map, u, r) / u(r), 1.0, 1e-13);
  }
}

TEST(EmdenFowler, ClosedFormMapsToU) {
  const ProblemParams prm = ProblemParams::create(6, -4.0, 5.0, 0.0, 0.0);
  const auto s = build_cosh_solution(prm);
  const EmdenFowlerMap map(prm);
  for (double r : {0.05, 0.5, 1.0, 3.0}) {
    const double t = -std::log(r);
    EXPECT_NEAR(map.to_v([&](double x) { return eval_u(s, map, x); }, t) / eval_v(s, t, 0), 1.0,
                1e-13);
  }
}

TEST(EmdenFowler, NonPositiveExponentRejected) {
  EXPECT_THROW(EmdenFowlerMap(5, 1.0), Error);
}
