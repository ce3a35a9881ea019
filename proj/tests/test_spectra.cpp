#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pmdent/spectra.hpp"

using pmdent::SpectralShape;

TEST(PowerTransmittivity, PeakAndHalfMaximum) {
  EXPECT_DOUBLE_EQ(pmdent::power_transmittivity({3, 130.0, 0.0}, 0.0), 1.0);
  EXPECT_NEAR(pmdent::power_transmittivity({3, 130.0, 0.0}, 65.0), 0.5, 1e-15);
  EXPECT_NEAR(pmdent::power_transmittivity({1, 100.0, 0.0}, 100.0), 0.0625, 1e-15);
}

TEST(PowerTransmittivity, CenterOffsetShiftsProfile) {
  const SpectralShape s{2, 80.0, 25.0};
  EXPECT_DOUBLE_EQ(pmdent::power_transmittivity(s, 25.0), 1.0);
  EXPECT_NEAR(pmdent::power_transmittivity(s, 65.0), 0.5, 1e-15);
  EXPECT_NEAR(pmdent::power_transmittivity(s, -15.0), 0.5, 1e-15);
}

TEST(PowerTransmittivity, EvenAndMonotone) {
  for (int n = 1; n <= 6; ++n) {
    const SpectralShape s{n, 90.0, 0.0};
    double prev = 1.0;
    for (double f = 0.0; f < 300.0; f += 0.7) {
      const double v = pmdent::power_transmittivity(s, f);
      EXPECT_DOUBLE_EQ(v, pmdent::power_transmittivity(s, -f));
      EXPECT_LE(v, prev);
      EXPECT_GE(v, 0.0);
      EXPECT_NEAR(v, oracle::super_gaussian(n, 90.0, f), 1e-14);
      prev = v;
    }
  }
}

TEST(PowerTransmittivity, HighOrderApproachesRectangle) {
  const SpectralShape s{20, 100.0, 0.0};
  EXPECT_GT(pmdent::power_transmittivity(s, 0.9 * 50.0), 0.95);
  EXPECT_LT(pmdent::power_transmittivity(s, 1.1 * 50.0), 0.05);
}

TEST(PumpWeight, SquareOfPowerSpectrum) {
  EXPECT_DOUBLE_EQ(pmdent::pump_weight({3, 120.0, 0.0}, 0.0), 1.0);
  EXPECT_NEAR(pmdent::pump_weight({3, 120.0, 0.0}, 60.0), 0.25, 1e-15);
  EXPECT_NEAR(pmdent::pump_weight({1, 75.0, 0.0}, 37.5), 0.25, 1e-15);
  for (double f = -200.0; f <= 200.0; f += 3.3) {
    const SpectralShape s{4, 110.0, 5.0};
    const double p = pmdent::power_transmittivity(s, f);
    EXPECT_DOUBLE_EQ(pmdent::pump_weight(s, f), p * p);
  }
}

TEST(SupportHalfwidth, ClosedForms) {
  EXPECT_NEAR(pmdent::support_halfwidth({1, 100.0, 0.0}, 0.5), 50.0, 1e-12);
  EXPECT_NEAR(pmdent::support_halfwidth({1, 100.0, 0.0}, std::pow(2.0, -16)), 200.0, 1e-12);
  // 65 * (ln(1e12) / ln 2)^(1/6)
  EXPECT_NEAR(pmdent::support_halfwidth({3, 130.0, 0.0}, 1e-12), 120.13658123386175, 1e-10);
}

TEST(SupportHalfwidth, AgreesWithBisection) {
  for (int n = 1; n <= 5; ++n)
    for (double eps : {1e-3, 1e-8, 1e-12, 1e-16}) {
      const double w = pmdent::support_halfwidth({n, 70.0, 0.0}, eps);
      EXPECT_NEAR(w, oracle::support_by_bisection(n, 70.0, eps), 1e-9) << n << ' ' << eps;
    }
}

TEST(SupportHalfwidth, RejectsBadEps) {
  EXPECT_THROW(pmdent::support_halfwidth({1, 1.0, 0.0}, 0.0), pmdent::InvalidArgument);
  EXPECT_THROW(pmdent::support_halfwidth({1, 1.0, 0.0}, 1.0), pmdent::InvalidArgument);
}

TEST(SpectralShape, Validation) {
  EXPECT_NO_THROW((SpectralShape{1, 1.0, 0.0}).validate());
  EXPECT_THROW((SpectralShape{0, 1.0, 0.0}).validate(), pmdent::InvalidArgument);
  EXPECT_THROW((SpectralShape{2, -5.0, 0.0}).validate(), pmdent::InvalidArgument);
  EXPECT_THROW((SpectralShape{2, 0.0, 0.0}).validate(), pmdent::InvalidArgument);
}

TEST(PumpBandwidth, FieldConventionWidensPowerSpectrum) {
  EXPECT_DOUBLE_EQ(pmdent::pump_power_fwhm(120.0, 3, pmdent::PumpBandwidth::power), 120.0);
  // The field amplitude sqrt(P) is at half maximum where P = 1/4.
  const double p_fwhm = pmdent::pump_power_fwhm(120.0, 3, pmdent::PumpBandwidth::field);
  EXPECT_NEAR(pmdent::power_transmittivity({3, p_fwhm, 0.0}, 60.0), 0.25, 1e-14);
}
