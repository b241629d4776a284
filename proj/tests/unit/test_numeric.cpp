#include <gtest/gtest.h>

#include <cmath>

#include "ftn/numeric.hpp"
#include "ftn/random.hpp"
#include "oracles.hpp"

namespace {

TEST(Numeric, QInverseRoundTrip) {
  for (double p : {1e-12, 1e-6, 1e-3, 0.1, 0.3, 0.5, 0.7, 0.99}) {
    EXPECT_NEAR(ftn::q_func(ftn::q_inv(p)) / p, 1.0, 1e-12) << p;
  }
  EXPECT_DOUBLE_EQ(ftn::q_inv(0.5), 0.0);
}

TEST(Numeric, LogQMatchesDirectFormInTheBody) {
  for (double x : {-3.0, -0.5, 0.0, 1.0, 5.0, 20.0}) EXPECT_NEAR(ftn::log_q(x), std::log(ftn::q_func(x)), 1e-10);
  // Deep tail: Mills-ratio leading term.
  const double x = 60.0;
  EXPECT_NEAR(ftn::log_q(x), -0.5 * x * x - std::log(x * std::sqrt(2.0 * oracle::pi)), 1e-3);
}

TEST(Numeric, GaussLegendreAgreesWithSimpson) {
  auto f = [](double t) { return std::exp(-t) * std::cos(3.0 * t); };
  const auto g = ftn::composite_gauss_legendre(0.0, 4.0, 8, 12);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(g.nodes[i]);
  EXPECT_NEAR(s, oracle::simpson(f, 0.0, 4.0, 20000), 1e-12);
}

TEST(Numeric, BracketedSolverFindsRoot) {
  const double r = ftn::solve_bracketed([](double x) { return x * x * x - 2.0; }, 0.0, 3.0, 1e-14);
  EXPECT_NEAR(r, std::cbrt(2.0), 1e-12);
  EXPECT_THROW(ftn::solve_bracketed([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), ftn::Error);
}

TEST(Numeric, SineIntegralAgreesWithQuadrature) {
  for (double x : {0.1, 1.0, 5.0, 30.0}) {
    const double ref = oracle::simpson([](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }, 0.0, x, 200000);
    EXPECT_NEAR(ftn::sine_integral(x), ref, 1e-9) << x;
  }
}

TEST(Numeric, WilsonIntervalBracketsEstimate) {
  const auto [lo, hi] = ftn::wilson_interval(5, 1000);
  EXPECT_LT(lo, 0.005);
  EXPECT_GT(hi, 0.005);
  EXPECT_EQ(ftn::wilson_interval(0, 0).second, 1.0);
}

TEST(Random, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(ftn::derive_seed(7, 3), ftn::derive_seed(7, 3));
  EXPECT_NE(ftn::derive_seed(7, 3), ftn::derive_seed(7, 4));
  EXPECT_NE(ftn::derive_seed(7, 3), ftn::derive_seed(8, 3));
}

TEST(Random, ParallelForIsIndexDeterministic) {
  std::vector<std::uint64_t> a(257), b(257);
  ftn::parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = ftn::derive_seed(11, i); });
  ftn::parallel_for(b.size(), 3, [&](std::size_t i) { b[i] = ftn::derive_seed(11, i); });
  EXPECT_EQ(a, b);
}

TEST(Random, ParallelForPropagatesExceptions) {
  EXPECT_THROW(ftn::parallel_for(10, 2, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
               std::runtime_error);
}

}  // namespace
