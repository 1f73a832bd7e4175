#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "biharm/special_functions.hpp"

using namespace biharm;

// Reference values from mpmath at 30 digits.

TEST(Gamma, KnownValues) {
  EXPECT_NEAR(gamma_fn(0.5), 1.77245385090551602729816748334, 1e-14);
  EXPECT_NEAR(gamma_fn(7.3) / 1271.42363366390883991787432614, 1.0, 1e-13);
  EXPECT_NEAR(gamma_fn(0.1) / 9.51350769866873128580797989582, 1.0, 1e-13);
  EXPECT_NEAR(gamma_fn(5.0), 24.0, 1e-12);
}

TEST(Gamma, ReflectionForNegativeArguments) {
  EXPECT_NEAR(gamma_fn(-1.5), 2.36327180120735470306422331112, 1e-13);
}

TEST(Gamma, RecurrenceProperty) {
  for (double x = -3.7; x < 12.0; x += 0.37) {
    EXPECT_NEAR(gamma_fn(x + 1.0) / (x * gamma_fn(x)), 1.0, 1e-12) << "x=" << x;
  }
}

TEST(Gamma, PolesAreDomainErrors) {
  for (double x : {0.0, -1.0, -4.0}) {
    try {
      gamma_fn(x);
      FAIL() << "no error at " << x;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Domain);
    }
  }
}

TEST(Beta, KnownValues) {
  EXPECT_NEAR(beta_fn(1.0, 0.5), 2.0, 1e-14);
  EXPECT_NEAR(beta_fn(2.5, 0.5), 1.17809724509617246442349126873, 1e-14);
  EXPECT_NEAR(beta_fn(2.3, 4.1), beta_fn(4.1, 2.3), 1e-15);
}

TEST(CoshPowerIntegral, ClosedFormAgainstReference) {
  EXPECT_NEAR(cosh_power_integral(-1.0, 1.0), std::numbers::pi / 2.0, 1e-14);
  EXPECT_NEAR(cosh_power_integral(-2.5, 0.7), 1.24859883537719998895791459838, 1e-13);
  EXPECT_NEAR(cosh_power_integral(-0.5, 2.0), 1.31102877714605990523241979495, 1e-13);
}

TEST(CoshPowerIntegral, QuadratureAgreesWithClosedForm) {
  for (double g : {-0.5, -1.0, -2.0, -3.3, -8.0}) {
    for (double nu : {0.3, 1.0, 2.5}) {
      const double a = cosh_power_integral(g, nu);
      const double b = cosh_power_integral_quadrature(g, nu);
      EXPECT_NEAR(a / b, 1.0, 1e-11) << g << " " << nu;
    }
  }
}

TEST(CoshPowerIntegral, DivergentExponentRejected) {
  EXPECT_THROW(cosh_power_integral(0.0, 1.0), Error);
  EXPECT_THROW(cosh_power_integral(-1.0, 0.0), Error);
}

TEST(SphereMeasure, KnownValues) {
  EXPECT_NEAR(sphere_measure(5), 26.3189450695716229835586426663, 1e-12);
  EXPECT_NEAR(sphere_measure(6), std::pow(std::numbers::pi, 3), 1e-12);
  EXPECT_NEAR(sphere_measure(7), 33.0733617923198081871747360716, 1e-12);
  EXPECT_NEAR(sphere_measure(8), 32.4696970113341457454801108962, 1e-12);
}

TEST(SphereMeasure, DimensionRecurrence) {
  // omega_{n+2} = 2 pi omega_n / n
  for (int n = 2; n < 14; ++n) {
    EXPECT_NEAR(sphere_measure(n + 2), 2.0 * std::numbers::pi * sphere_measure(n) / n,
                1e-12 * sphere_measure(n + 2));
  }
}
