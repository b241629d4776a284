#include <gtest/gtest.h>

#include <cmath>

#include "ftn/channel.hpp"
#include "ftn/pulse.hpp"
#include "oracles.hpp"

namespace {

constexpr double W = 0.5;

TEST(SymbolCount, ExamplesAtUnitRollOff) {
  EXPECT_EQ(ftn::symbol_count(132.0, 8.57, 1.0, 1.0), 62u);
  EXPECT_EQ(ftn::symbol_count(132.0, 8.57, 0.4859, 1.0), 128u);
}

TEST(SymbolCount, OneAcceleratedStepFits) {
  for (double beta : {0.0, 0.3, 1.0}) {
    const double tau = 0.6, c = 5.0;
    EXPECT_EQ(ftn::symbol_count(c + tau * (1.0 + beta), c, tau, beta), 2u);
  }
}

TEST(SymbolCount, PulseOverloadAgrees) {
  const ftn::Pulse p = ftn::make_rrc(1.0, W, 8.57);
  EXPECT_EQ(ftn::symbol_count(p, 132.0, 0.4859, W), 128u);
  EXPECT_THROW(ftn::symbol_count(p, 8.0, 1.0, W), ftn::Error);
  EXPECT_THROW(ftn::symbol_count(132.0, 8.57, 0.0, 1.0), ftn::Error);
}

TEST(Gram, TwoByTwoEigenvalues) {
  const ftn::Pulse p = ftn::make_rrc(0.5, W, 6.0);
  const Eigen::MatrixXd H = ftn::build_gram(p, 0.6, 2);
  const double h1 = std::abs(H(0, 1));
  const auto es = ftn::diagonalize(H);
  EXPECT_NEAR(es.eigenvalues[0], 1.0 + h1, 1e-12);
  EXPECT_NEAR(es.eigenvalues[1], 1.0 - h1, 1e-12);
}

TEST(Gram, SincAtNyquistIsIdentity) {
  const Eigen::MatrixXd H = ftn::build_gram(ftn::make_sinc(W), 1.0, 16);
  EXPECT_LE((H - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gram, TraceIdentity) {
  const auto es = ftn::diagonalize(ftn::build_gram(ftn::make_rrc(1.0, W, 8.57), 0.4859, 128), false);
  double s = 0.0;
  for (double l : es.eigenvalues) s += l;
  EXPECT_NEAR(s, 128.0, 1e-4);
}

TEST(Diagonalize, IdentityAndTridiagonal) {
  for (double l : ftn::diagonalize(Eigen::MatrixXd::Identity(5, 5)).eigenvalues) EXPECT_NEAR(l, 1.0, 1e-14);
  const double h1 = 0.3;
  const auto es = ftn::diagonalize(ftn::toeplitz({1.0, h1, 0.0}));
  std::vector<double> ref;
  for (int k = 1; k <= 3; ++k) ref.push_back(1.0 + 2.0 * h1 * std::cos(k * oracle::pi / 4.0));
  std::sort(ref.begin(), ref.end(), std::greater<>());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(es.eigenvalues[i], ref[i], 1e-13);
}

TEST(Diagonalize, AgreesWithJacobiOracle) {
  const Eigen::MatrixXd H = ftn::build_gram(ftn::make_rrc(0.5, W, 10.52), 0.5, 64);
  const auto es = ftn::diagonalize(H);
  const auto ref = oracle::jacobi_eigenvalues(H);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(es.eigenvalues[i] / ref[i], 1.0, 1e-7) << i;
  // Reconstruction from the eigenvectors.
  Eigen::VectorXd lam(64);
  for (int i = 0; i < 64; ++i) lam(i) = es.eigenvalues[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd R = es.eigvectors * lam.asDiagonal() * es.eigvectors.transpose();
  EXPECT_LE((R - H).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Diagonalize, RejectsIndefiniteMatrix) {
  try {
    ftn::diagonalize(ftn::toeplitz({1.0, 0.9, -0.9}));
    FAIL();
  } catch (const ftn::Error& e) {
    EXPECT_EQ(e.code(), ftn::ErrorCode::not_positive_definite);
  }
}

TEST(FoldedSpectrum, FlatForNyquistSinc) {
  for (double l : ftn::folded_spectrum_eigs(ftn::make_sinc(W), 1.0, 32)) EXPECT_NEAR(l, 1.0, 1e-9);
}

TEST(FoldedSpectrum, ApproximatesLargeGram) {
  const ftn::Pulse p = ftn::make_rrc(0.3, W, 12.0);
  const auto approx = ftn::folded_spectrum_eigs(p, 1.0, 512);
  const auto exact = ftn::diagonalize(ftn::build_gram(p, 1.0, 512), false).eigenvalues;
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(approx[i] / exact[i] - 1.0));
  EXPECT_LE(worst, 5e-2);
}

TEST(FoldedSpectrum, ShortBlockDeviationIsFinite) {
  const ftn::Pulse p = ftn::make_rrc(1.0, W, 8.57);
  const auto approx = ftn::folded_spectrum_eigs(p, 0.5, 8);
  const auto exact = ftn::diagonalize(ftn::build_gram(p, 0.5, 8), false).eigenvalues;
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(approx[i] - exact[i]));
  RecordProperty("max_abs_deviation", std::to_string(worst));
  EXPECT_TRUE(std::isfinite(worst));
}

TEST(ChannelModel, NyquistSincSnrIsOmegaOverN) {
  const ftn::ChannelModel ch = ftn::make_channel(ftn::make_sinc(W), 40.0, 10.0, 1.0, W);
  ASSERT_EQ(ch.N, 40u);
  for (double s : ch.snr()) EXPECT_NEAR(s / 10.0, 40.0 / 40.0, 1e-9);
}

TEST(ChannelModel, TwoSymbolSnrRatio) {
  const ftn::Pulse p = ftn::make_rrc(0.5, W, 6.0);
  ftn::ChannelOptions opt;
  opt.symbols = 2;
  const ftn::ChannelModel ch = ftn::make_channel(p, 20.0, 10.0, 0.6, W, opt);
  const double h1 = std::abs(ftn::autocorrelation(p, 0.6, 1));
  EXPECT_NEAR(ch.snr()[0] / ch.snr()[1], (1.0 + h1) / (1.0 - h1), 1e-10);
}

TEST(ChannelModel, OobCheck) {
  ftn::ChannelOptions opt;
  opt.eps_W = 1e-4;
  EXPECT_THROW(ftn::make_channel(ftn::make_rrc(1.0, W, 4.0), 50.0, 10.0, 1.0, W, opt), ftn::Error);
  EXPECT_NO_THROW(ftn::make_channel(ftn::make_rrc(1.0, W, 8.57), 50.0, 10.0, 1.0, W, opt));
}

// Fraction of block energy outside the window, by direct integration of each pulse.
double direct_ooi(double tau, double Tx, std::size_t N) {
  const double centre = 0.5 * static_cast<double>(N - 1) * tau;
  double inside = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double tn = static_cast<double>(n) * tau - centre;
    inside += oracle::simpson([&](double t) { return std::pow(ftn::sinc(t - tn), 2); }, -0.5 * Tx, 0.5 * Tx, 20000);
  }
  return 1.0 - inside / static_cast<double>(N);
}

TEST(Ooi, BlocklengthMatchesDirectScan) {
  const ftn::Pulse p = ftn::make_sinc(W);
  const double Tx = 100.0, eps = 1e-2;
  const std::size_t N = ftn::ooi_max_blocklength(p, 1.0, Tx, eps);
  std::size_t ref = 0;
  for (std::size_t n = 1; n <= 200; ++n) {
    if (direct_ooi(1.0, Tx, n) <= eps) ref = n;
    else break;
  }
  EXPECT_LE(std::abs(static_cast<long>(N) - static_cast<long>(ref)), 2);
}

TEST(Ooi, SinglePulseBaseCase) {
  const ftn::Pulse p = ftn::make_sinc(W);
  const double single = ftn::ooi_fraction(p, 1.0, 10.0, 1);
  EXPECT_GE(ftn::ooi_max_blocklength(p, 1.0, 10.0, std::min(0.99, single * 1.01)), 1u);
}

TEST(Ooi, VacuousConstraintHitsCap) {
  const ftn::Pulse p = ftn::make_sinc(W);
  EXPECT_EQ(ftn::ooi_max_blocklength(p, 1.0, 10.0, 0.999999), 41u);
}

}  // namespace
