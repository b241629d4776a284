#include <gtest/gtest.h>

#include <cmath>

#include "ftn/design.hpp"
#include "ftn/pswf.hpp"

namespace {

constexpr double W = 0.5;

TEST(TauStar, OperatingPoint) {
  const double eta = ftn::max_dimensions(132.0, 1e-4).eta;
  EXPECT_NEAR(ftn::tau_star(132.0, 8.57, eta, 1.0), 0.4859, 1e-4);
}

TEST(TauStar, EqualsNyquistWhenPulseMatchesLoss) {
  for (double beta : {0.0, 0.5, 1.0}) EXPECT_DOUBLE_EQ(ftn::tau_star(50.0, 5.0, 4.0, beta), 1.0 / (1.0 + beta));
}

TEST(TauStar, IncreasesTowardsNyquistWithWindow) {
  double prev = 0.0;
  for (double omega : {20.0, 50.0, 200.0, 1e4, 1e7}) {
    const double t = ftn::tau_star(omega, 8.57, 4.0, 1.0);
    EXPECT_GT(t, prev);
    prev = t;
  }
  EXPECT_NEAR(prev, 0.5, 1e-6);
  EXPECT_THROW(ftn::tau_star(5.0, 8.57, 4.0, 1.0), ftn::Error);
}

TEST(TauStar, PulseOverloadAgrees) {
  const ftn::Pulse p = ftn::make_rrc(1.0, W, 8.57);
  EXPECT_NEAR(ftn::tau_star(p, 132.0, 4.0, W), ftn::tau_star(132.0, 8.57, 4.0, 1.0), 1e-12);
}

TEST(PercentGain, ZeroAtNyquist) {
  EXPECT_EQ(ftn::percent_gain(ftn::make_rrc(0.5, W, 10.52), 100.0, 1000.0, 1e-3, 1.0, W), 0.0);
}

TEST(PercentGain, NonDecreasingAsTauShrinks) {
  const ftn::Pulse p = ftn::make_rrc(0.5, W, 10.52);
  double prev = -1.0;
  for (double tau : {1.0, 0.9, 0.8, 0.7, 0.6}) {
    const double g = ftn::percent_gain(p, 100.0, 1000.0, 1e-3, tau, W);
    EXPECT_GE(g, prev - 1e-9) << tau;
    prev = g;
  }
}

TEST(TableOne, RowsSatisfyConstraints) {
  ftn::FsDesignSpec spec;
  spec.omega = 20.0;
  spec.eps_W = 1e-4;
  spec.rho = 100.0;
  spec.K0 = 0.1;
  for (const auto& row : ftn::fs_table()) {
    const double Tp = row.c / (2.0 * W);
    EXPECT_NEAR(ftn::fs_energy(row.coeffs, Tp), 1.0, 1e-3) << row.c;
    const auto coeffs = ftn::normalize_fs_coeffs(row.coeffs, Tp);
    const ftn::FsEvaluation e = ftn::evaluate_fs_design(coeffs, Tp, row.T, spec);
    EXPECT_LE(e.oob, 1.1e-4) << row.c;
    EXPECT_LE(e.max_isi, 0.101) << row.c;
    // Independent check through the sampled pulse.
    const ftn::Pulse p = ftn::fs_table_pulse(row);
    EXPECT_NEAR(ftn::oob_energy(p, W), e.oob, 1e-8);
  }
}

TEST(Optimizer, ResultIsFeasibleAndReproducible) {
  ftn::FsDesignSpec spec;
  spec.omega = 20.0;
  ftn::FsDesignOptions opt;
  opt.restarts = 3;
  opt.max_evals = 1500;
  const ftn::FsDesignResult a = ftn::optimize_fs_pulse_at(spec, 4.0, opt);
  const ftn::FsDesignResult b = ftn::optimize_fs_pulse_at(spec, 4.0, opt);
  EXPECT_EQ(a.coeffs, b.coeffs);
  EXPECT_EQ(a.T, b.T);
  const ftn::Pulse p = ftn::to_pulse(a);
  EXPECT_LE(ftn::oob_energy(p, W), spec.eps_W * (1.0 + 1e-6));
  for (long n = 1; n * a.T < a.Tp; ++n) EXPECT_LE(std::abs(ftn::autocorrelation(p, 1.0, n)), spec.K0 * (1.0 + 1e-6));
}

TEST(Optimizer, WorkerCountDoesNotChangeResult) {
  ftn::FsDesignSpec spec;
  spec.omega = 20.0;
  ftn::FsDesignOptions opt;
  opt.restarts = 3;
  opt.max_evals = 800;
  const auto a = ftn::optimize_fs_pulse_at(spec, 4.0, opt);
  opt.workers = 2;
  const auto b = ftn::optimize_fs_pulse_at(spec, 4.0, opt);
  EXPECT_EQ(a.coeffs, b.coeffs);
}

TEST(Optimizer, ImpossibleConstraintIsReported) {
  ftn::FsDesignSpec spec;
  spec.omega = 20.0;
  spec.eps_W = 1e-12;
  ftn::FsDesignOptions opt;
  opt.restarts = 2;
  opt.max_evals = 300;
  try {
    ftn::optimize_fs_pulse_at(spec, 1.0, opt);
    FAIL();
  } catch (const ftn::Error& e) {
    EXPECT_EQ(e.code(), ftn::ErrorCode::infeasible);
  }
}

// With vacuous constraints the optimum is found by a dense grid over the unit sphere of
// three coefficients and the symbol period.
TEST(Optimizer, VacuousConstraintsMatchGridSearch) {
  ftn::FsDesignSpec spec;
  spec.omega = 6.0;
  spec.eps_W = 0.999;
  spec.K0 = 1e9;
  spec.rho = 100.0;
  const double c = 2.0, Tp = c / (2.0 * W);
  ASSERT_EQ(ftn::fs_harmonics(W, Tp), 3u);
  double grid_best = -1.0;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j < 80; ++j) {
      const double th = 3.14159265358979 * i / 40.0, ph = 2.0 * 3.14159265358979 * j / 80.0;
      std::vector<double> x{std::cos(th), std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph)};
      const double e = ftn::fs_energy(x, Tp);
      for (auto& v : x) v /= std::sqrt(e);
      for (int k = 0; k <= 30; ++k) {
        const double T = 0.5 + (Tp * (1 - 1e-9) - 0.5) * k / 30.0;
        grid_best = std::max(grid_best, ftn::evaluate_fs_design(x, Tp, T, spec).c_na);
      }
    }
  ftn::FsDesignOptions opt;
  opt.restarts = 6;
  opt.max_evals = 3000;
  const ftn::FsDesignResult r = ftn::optimize_fs_pulse_at(spec, c, opt);
  RecordProperty("grid_best", std::to_string(grid_best));
  RecordProperty("optimizer", std::to_string(r.eval.c_na));
  EXPECT_GE(r.eval.c_na, grid_best - 1e-3);
}

TEST(NelderMead, MinimizesQuadratic) {
  const auto r = ftn::nelder_mead([](const std::vector<double>& x) { return (x[0] - 1) * (x[0] - 1) + 4 * (x[1] + 2) * (x[1] + 2); },
                                  {0.0, 0.0}, {0.5, 0.5}, 2000);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], -2.0, 1e-4);
}

}  // namespace
