#include <gtest/gtest.h>

#include <cmath>

#include "ftn/design.hpp"
#include "ftn/pulse.hpp"
#include "oracles.hpp"

namespace {

constexpr double W = 0.5;

// Autocorrelation of p at `lag` by Simpson quadrature over the overlap.
double quad_autocorrelation(const ftn::Pulse& p, double lag, std::size_t panels) {
  const double half = 0.5 * *p.Tp;
  return oracle::simpson([&](double t) { return p(t) * p(t - lag); }, -half + lag, half, panels);
}

// p^(f) = int p(t) cos(2 pi f t) dt by Simpson.
double quad_transform(const ftn::Pulse& p, double f, std::size_t panels) {
  const double half = 0.5 * *p.Tp;
  return oracle::simpson([&](double t) { return p(t) * std::cos(2.0 * oracle::pi * f * t); }, -half, half, panels);
}

TEST(Pulse, WideRrcWithoutRollOffApproachesSinc) {
  const ftn::Pulse p = ftn::make_rrc(0.0, W, 200.0);
  for (double t : {0.0, 0.3, 1.7, 4.25}) EXPECT_NEAR(p(t), ftn::sinc(2.0 * W * t) * std::sqrt(2.0 * W), 5e-3) << t;
  EXPECT_NEAR(ftn::autocorrelation(p, 1.0, 0), 1.0, 1e-9);
  for (long n = 1; n <= 3; ++n) EXPECT_NEAR(ftn::autocorrelation(p, 1.0, n), 0.0, 5e-3);
}

TEST(Pulse, SincAutocorrelationIsKronecker) {
  const ftn::Pulse p = ftn::make_sinc(W);
  EXPECT_DOUBLE_EQ(ftn::autocorrelation(p, 1.0, 0), 1.0);
  for (long n = 1; n <= 5; ++n) EXPECT_NEAR(ftn::autocorrelation(p, 1.0, n), 0.0, 1e-15);
}

TEST(Pulse, RrcRejectsBadArguments) {
  EXPECT_THROW(ftn::make_rrc(1.2, W, 8.0), ftn::Error);
  EXPECT_THROW(ftn::make_rrc(0.5, W, 8.0, 1.0), ftn::Error);
  try {
    ftn::make_rrc(-0.1, W, 8.0);
    FAIL();
  } catch (const ftn::Error& e) {
    EXPECT_EQ(e.code(), ftn::ErrorCode::invalid_roll_off);
  }
}

TEST(Pulse, GaussianMeetsItsOobTarget) {
  const ftn::Pulse p = ftn::make_gaussian(1e-4, W);
  EXPECT_LE(ftn::oob_energy(p, W), 1e-4);
  EXPECT_LT(*ftn::make_gaussian(1e-2, W).Tp, *p.Tp);
}

TEST(Pulse, GaussianWidthIsTheFirstPassingWidthUnderQuadrature) {
  const ftn::Pulse p = ftn::make_gaussian(1e-4, W);
  auto oob = [](const ftn::Pulse& q) {
    const double inband = oracle::simpson([&](double f) { return std::pow(quad_transform(q, f, 4000), 2); }, 0.0, W, 400);
    return 1.0 - 2.0 * inband;
  };
  EXPECT_LE(oob(p), 1e-4 * 1.001);
  const ftn::Pulse narrower = ftn::make_gaussian_truncated(1e-4, W, *p.Tp - 0.5);
  EXPECT_GT(oob(narrower), 1e-4);
}

TEST(Pulse, RectangleFromOneCoefficient) {
  const double Tp = 4.0;
  const ftn::Pulse p = ftn::make_fs_pulse({1.0 / std::sqrt(Tp)}, Tp, 2.0);
  EXPECT_NEAR(ftn::autocorrelation_at(p, 0.0), 1.0, 1e-12);
  for (double lag : {0.5, 1.0, 2.5, 3.9}) EXPECT_NEAR(ftn::autocorrelation_at(p, lag), 1.0 - lag / Tp, 1e-12);
  for (double f : {0.0, 0.1, 0.37, 1.3}) {
    const double ref = Tp * std::pow(ftn::sinc(f * Tp), 2);
    EXPECT_NEAR(std::pow(ftn::fourier_transform(p, f), 2), ref, 1e-6) << f;
  }
}

TEST(Pulse, CosineSeriesClosedFormMatchesQuadrature) {
  const ftn::Pulse p = ftn::fs_table_pulse(ftn::fs_table()[1]);
  for (double lag = 0.0; lag < *p.Tp; lag += 0.173) {
    EXPECT_NEAR(ftn::autocorrelation_at(p, lag), quad_autocorrelation(p, lag, 20000), 1e-6) << lag;
  }
}

TEST(Pulse, CosineSeriesRejectsWrongEnergy) {
  try {
    ftn::make_fs_pulse({0.5, 0.1}, 4.0, 2.0);
    FAIL();
  } catch (const ftn::Error& e) {
    EXPECT_EQ(e.code(), ftn::ErrorCode::energy_mismatch);
  }
}

TEST(Pulse, WideRrcSpectrumIsRaisedCosine) {
  const ftn::Pulse p = ftn::make_rrc(1.0, W, 400.0);
  const double T = p.T;
  for (double f : {0.0, 0.1, 0.2, 0.3, 0.45}) {
    const double ref = 0.5 * T * (1.0 + std::cos(oracle::pi * T * f));
    EXPECT_NEAR(std::pow(ftn::fourier_transform(p, f), 2), ref, 1e-4) << f;
  }
}

TEST(Pulse, ParsevalHoldsForTablePulse) {
  const ftn::Pulse p = ftn::fs_table_pulse(ftn::fs_table()[1]);
  const double e = 2.0 * oracle::simpson([&](double f) { return std::pow(ftn::fourier_transform(p, f), 2); }, 0.0, 60.0,
                                         240000);
  EXPECT_NEAR(e, 1.0, 1e-6);
}

TEST(Pulse, SampledTransformMatchesQuadrature) {
  const ftn::Pulse p = ftn::make_rrc(0.5, W, 10.0);
  for (double f : {0.0, 0.2, 0.5, 0.8}) EXPECT_NEAR(ftn::fourier_transform(p, f), quad_transform(p, f, 20000), 1e-6);
}

TEST(Oob, IdealSincHasNone) { EXPECT_NEAR(ftn::oob_energy(ftn::make_sinc(W), W), 0.0, 1e-15); }

TEST(Oob, RrcCrossingAgreesWithFftOracle) {
  const ftn::PulseFamily fam{ftn::PulseFamily::rrc, 0.3};
  const double c = ftn::min_c(fam, 1e-3, W);
  EXPECT_NEAR(c, 6.51, 0.05);
  auto fft_oob = [&](double cc) {
    const ftn::Pulse p = ftn::make_rrc(0.3, W, cc);
    return oracle::fft_oob([&](double t) { return p(t); }, *p.Tp, W, 4096, 1 << 20);
  };
  EXPECT_LE(fft_oob(c), 1e-3 * 1.001);
  EXPECT_GT(fft_oob(c - 0.01), 1e-3 * 0.999);
}

TEST(Oob, CrossingsForUnitAndHalfRollOff) {
  EXPECT_NEAR(ftn::min_c({ftn::PulseFamily::rrc, 1.0}, 1e-4, W), 8.57, 0.05);
  EXPECT_NEAR(ftn::min_c({ftn::PulseFamily::rrc, 0.5}, 1e-4, W), 10.52, 0.05);
}

TEST(Oob, VacuousConstraintGivesGridMinimum) {
  EXPECT_DOUBLE_EQ(ftn::min_c({ftn::PulseFamily::rrc, 0.5}, 0.999, W), 1.0);
}

TEST(Oob, AndersonPulseIsRejected) {
  EXPECT_THROW(ftn::min_c({ftn::PulseFamily::anderson_excluded, 0.0}, 1e-4, W), ftn::Error);
}

TEST(Autocorrelation, UnitEnergyAtZeroLag) {
  for (const ftn::Pulse& p : {ftn::make_rrc(0.3, W, 9.0), ftn::make_gaussian(1e-3, W), ftn::make_pswf_principal(6.0, W),
                              ftn::fs_table_pulse(ftn::fs_table()[0])})
    EXPECT_NEAR(ftn::autocorrelation(p, 0.5, 0), 1.0, 1e-9);
}

TEST(Autocorrelation, WideRrcIsNearlyNyquist) {
  const ftn::Pulse p = ftn::make_rrc(0.3, W, 120.0);
  for (long n = 1; n <= 6; ++n) EXPECT_NEAR(ftn::autocorrelation(p, 1.0, n), 0.0, 1e-3) << n;
}

TEST(Autocorrelation, FirstLagConvergesUnderGridRefinement) {
  const ftn::Pulse p = ftn::make_rrc(1.0, W, 8.57);
  const ftn::Pulse fine = ftn::make_rrc(1.0, W, 8.57, p.grid_step / 4.0);
  const double lag = 0.4859 * p.T;
  EXPECT_NEAR(ftn::autocorrelation_at(p, lag), quad_autocorrelation(fine, lag, 4 * p.samples.size()), 1e-6);
}

}  // namespace
