#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ftn/channel.hpp"
#include "ftn/error.hpp"
#include "ftn/numeric.hpp"
#include "ftn/pulse.hpp"
#include "ftn/random.hpp"

namespace ftn {

enum class BoundMethod { capacity, na, mc, rcu };

inline const char* to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::capacity: return "capacity";
    case BoundMethod::na: return "na";
    case BoundMethod::mc: return "mc";
    case BoundMethod::rcu: return "rcu";
  }
  return "unknown";
}

struct BoundDiagnostics {
  std::optional<double> t_hat;
  std::optional<double> lambda_threshold;
  std::optional<double> std_error;
  std::optional<std::size_t> mc_samples;
  std::optional<std::size_t> rcu_samples;
  std::optional<std::uint64_t> seed;
};

struct BoundResult {
  BoundMethod method = BoundMethod::na;
  std::optional<double> rate_bps_hz;
  std::optional<double> bler;
  BoundDiagnostics diagnostics;
};

// Asymptotic capacity (1/2W) int log2(1 + rho 2W folded(f)) df over one fold.
inline double capacity_ftn(const Pulse& p, double tau, double rho, double W) {
  require(tau > 0.0 && tau <= 1.0 && rho > 0.0 && W > 0.0, ErrorCode::invalid_argument,
          "capacity needs tau in (0,1], rho > 0, W > 0");
  const FoldedSpectrum folded(p, tau);
  const double edge = 0.5 / (tau * p.T);
  auto integrand = [&](double f) { return std::log2(1.0 + rho * 2.0 * W * folded(f)); };
  // Split at the band edge W where band-limited spectra have a kink.
  double total = 0.0;
  if (W < edge) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, W, 15, 1e-10);
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, W, edge, 15, 1e-10);
  } else {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, edge, 15, 1e-10);
  }
  return 2.0 * total / (2.0 * W);
}

struct NaMoments {
  double capacity = 0.0;    // C_NA, bits per unit TBP
  double dispersion = 0.0;  // V_NA
};

inline NaMoments na_moments(const ChannelModel& ch, bool real_valued = false) {
  NaMoments m;
  for (double s2 : ch.noise_vars) {
    const double snr = 1.0 / s2;
    m.capacity += std::log2(1.0 + snr);
    m.dispersion += 1.0 - 1.0 / ((1.0 + snr) * (1.0 + snr));
  }
  m.capacity /= ch.omega;
  m.dispersion /= ch.omega;
  if (real_valued) {
    m.capacity *= 0.5;
    m.dispersion *= 0.5;
  }
  return m;
}

inline double na_rate(const ChannelModel& ch, double Pe, bool real_valued = false) {
  require(Pe > 0.0 && Pe < 1.0, ErrorCode::invalid_argument, "Pe must lie in (0,1)");
  const NaMoments m = na_moments(ch, real_valued);
  return m.capacity - std::sqrt(m.dispersion / ch.omega) * log2e * q_inv(Pe) +
         std::log2(ch.omega) / (2.0 * ch.omega);
}

inline double na_bler(const ChannelModel& ch, double R, bool real_valued = false) {
  require(R > 0.0, ErrorCode::invalid_argument, "rate must be positive");
  const NaMoments m = na_moments(ch, real_valued);
  const double spread = std::sqrt(m.dispersion / ch.omega) * log2e;
  return q_func((m.capacity - R + std::log2(ch.omega) / (2.0 * ch.omega)) / spread);
}

// Mean and variance of the mismatched information density per channel use.
inline std::pair<double, double> moments_mismatched(double sigma_sq) {
  require(sigma_sq > 0.0, ErrorCode::invalid_argument, "sigma^2 must be positive");
  const double g = 1.0 + 1.0 / sigma_sq;
  return {std::log(g), 1.0 - 1.0 / (g * g)};
}

struct CgfEval {
  double t = 0.0;
  double K = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
};

// CGF of Y = sum_n X_n / s_n, X_n complex noncentral chi-square (one complex DOF,
// noncentrality xi_n, MGF e^{u xi/(1-u)}/(1-u)).
class ChiSquareSum {
 public:
  ChiSquareSum(std::span<const double> scale, std::span<const double> xi) : s_(scale), xi_(xi) {
    require(s_.size() == xi_.size() && !s_.empty(), ErrorCode::invalid_argument,
            "scale and noncentrality lists must match");
    smin_ = *std::min_element(s_.begin(), s_.end());
    require(smin_ > 0.0, ErrorCode::invalid_argument, "scales must be positive");
  }

  double domain_sup() const { return smin_; }

  double mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < s_.size(); ++n) m += (1.0 + xi_[n]) / s_[n];
    return m;
  }

  CgfEval operator()(double t) const {
    require(t < smin_, ErrorCode::domain_violation, "t outside the CGF domain");
    CgfEval e{t, 0.0, 0.0, 0.0};
    for (std::size_t n = 0; n < s_.size(); ++n) {
      const double d = s_[n] - t;
      const double id = 1.0 / d;
      e.K += xi_[n] * t * id - std::log1p(-t / s_[n]);
      e.K1 += id + xi_[n] * s_[n] * id * id;
      e.K2 += id * id + 2.0 * xi_[n] * s_[n] * id * id * id;
    }
    return e;
  }

  // K'(t) and K''(t) without the logarithms.
  std::pair<double, double> slope(double t) const {
    double k1 = 0.0, k2 = 0.0;
    for (std::size_t n = 0; n < s_.size(); ++n) {
      const double id = 1.0 / (s_[n] - t);
      const double xs = xi_[n] * s_[n] * id * id;
      k1 += id + xs;
      k2 += id * id + 2.0 * xs * id;
    }
    return {k1, k2};
  }

  // Saddlepoint t with K'(t) = a.  Newton steps kept inside a shrinking bisection bracket.
  double solve(double a) const {
    const double target_tol = 1e-10 * std::max(std::abs(a), 1e-300);
    const double m = mean();
    if (a == m) return 0.0;
    double lo, hi;
    if (a < m) {
      require(a > 0.0, ErrorCode::no_root, "a is below the infimum of K'");
      hi = 0.0;
      lo = -smin_;
      for (int i = 0; slope(lo).first > a; ++i) {
        require(i < 2000, ErrorCode::no_root, "no lower-tail saddlepoint");
        lo *= 2.0;
      }
    } else {
      lo = 0.0;
      hi = smin_;
    }
    double t = 0.0;
    {
      // Gaussian start point when it falls inside the bracket.
      const auto [k1, k2] = slope(0.0);
      const double g = (a - k1) / k2;
      if (g > lo && g < hi) t = g;
    }
    for (int it = 0; it < 500; ++it) {
      const auto [k1, k2] = slope(t);
      const double f = k1 - a;
      if (std::abs(f) <= target_tol) return t;
      if (f > 0.0) hi = t;
      else lo = t;
      double next = t - f / k2;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == t || hi - lo <= 1e-15 * std::max(1.0, std::abs(t))) return next;
      t = next;
    }
    return t;
  }

 private:
  std::span<const double> s_;
  std::span<const double> xi_;
  double smin_ = 0.0;
};

inline CgfEval cgf(double t, std::span<const double> sigma_sq, std::span<const double> xi) {
  return ChiSquareSum(sigma_sq, xi)(t);
}

// ln Q(x) + x^2/2 for x >= 0.
inline double log_q_scaled(double x) {
  if (x < 30.0) return std::log(q_func(x)) + 0.5 * x * x;
  const double r = 1.0 / (x * x);
  const double series =
      1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 + r * (-945.0 + r * 10395.0)))));
  return -std::log(x * std::sqrt(2.0 * pi)) + std::log(series);
}

struct SaddlepointResult {
  double log_prob = 0.0;
  double t_hat = 0.0;
  double K2 = 0.0;
};

namespace detail {

inline SaddlepointResult saddlepoint_tail(const ChiSquareSum& y, double a) {
  const double t = y.solve(a);
  const CgfEval e = y(t);
  require(e.K2 > 0.0, ErrorCode::no_root, "non-positive K'' at the saddlepoint");
  const double x = std::abs(t) * std::sqrt(e.K2);
  // ln Q(x) + K - t K' + x^2/2, with the Gaussian factor folded into log_q_scaled.
  return {log_q_scaled(x) + e.K - t * e.K1, t, e.K2};
}

}  // namespace detail

// ln P[Y <= a] for a at or below the mean.
inline SaddlepointResult saddlepoint_log_cdf(std::span<const double> sigma_sq, std::span<const double> xi,
                                             double a) {
  const ChiSquareSum y(sigma_sq, xi);
  require(a <= y.mean() * (1.0 + 1e-12), ErrorCode::invalid_argument,
          "lower-tail form requested above the mean");
  return detail::saddlepoint_tail(y, std::min(a, y.mean()));
}

// ln P[Y >= a] for a at or above the mean, same approximation with t >= 0.
inline SaddlepointResult saddlepoint_log_sf(std::span<const double> sigma_sq, std::span<const double> xi,
                                            double a) {
  const ChiSquareSum y(sigma_sq, xi);
  require(a >= y.mean() * (1.0 - 1e-12), ErrorCode::invalid_argument,
          "upper-tail form requested below the mean");
  return detail::saddlepoint_tail(y, std::max(a, y.mean()));
}

// Meta-converse threshold: lambda with P[(1/N) sum V_n/(1+sigma_n^2) > lambda] = Pe.
inline double mc_threshold(const ChannelModel& ch, double Pe) {
  require(Pe > 0.0 && Pe < 0.5, ErrorCode::invalid_argument, "Pe must lie in (0,0.5)");
  std::vector<double> scale(ch.N), xi(ch.N);
  for (std::size_t n = 0; n < ch.N; ++n) {
    scale[n] = 1.0 + ch.noise_vars[n];
    xi[n] = ch.noise_vars[n];
  }
  const ChiSquareSum v(scale, xi);
  const double mean = v.mean();
  const double target = std::log(Pe);
  auto g = [&](double a) { return detail::saddlepoint_tail(v, a).log_prob - target; };
  const double sd = std::sqrt(v(0.0).K2);
  double hi = mean + sd;
  for (int i = 0; g(hi) > 0.0; ++i) {
    if (i > 200) throw Error(ErrorCode::threshold_not_found, "meta-converse threshold not bracketed");
    hi = mean + (hi - mean) * 2.0;
  }
  const double a = solve_bracketed(g, mean, hi, 1e-13 * hi, 1e-13);
  return a / static_cast<double>(ch.N);
}

inline BoundResult mc_rate(const ChannelModel& ch, double Pe) {
  const double lambda = mc_threshold(ch, Pe);
  std::vector<double> xi(ch.N);
  for (std::size_t n = 0; n < ch.N; ++n) xi[n] = 1.0 + ch.noise_vars[n];
  const ChiSquareSum u(ch.noise_vars, xi);
  const double a = lambda * static_cast<double>(ch.N);
  const SaddlepointResult r = detail::saddlepoint_tail(u, a);
  // Above the mean the tail form gives P[Y >= a]; take its complement.
  const double log_p = (a <= u.mean()) ? r.log_prob : log1m_exp(r.log_prob);
  BoundResult out;
  out.method = BoundMethod::mc;
  out.bler = Pe;
  out.rate_bps_hz = -log_p / (ch.omega * ln2);
  out.diagnostics.t_hat = r.t_hat;
  out.diagnostics.lambda_threshold = lambda;
  return out;
}

// Sampled meta-converse threshold (empirical (1-Pe)-quantile of the V statistic).
inline double mc_threshold_sampled(const ChannelModel& ch, double Pe, std::size_t samples, std::uint64_t seed,
                                   unsigned workers = 1) {
  constexpr std::size_t chunk = 1 << 16;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<double> stat(samples);
  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    ComplexNormal cn(1.0);
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) {
      double s = 0.0;
      for (std::size_t n = 0; n < ch.N; ++n) {
        const double v = std::norm(std::complex<double>(std::sqrt(ch.noise_vars[n]), 0.0) + cn(rng));
        s += v / (1.0 + ch.noise_vars[n]);
      }
      stat[i] = s / static_cast<double>(ch.N);
    }
  });
  const auto k = static_cast<std::size_t>(std::floor((1.0 - Pe) * static_cast<double>(samples)));
  std::nth_element(stat.begin(), stat.begin() + static_cast<std::ptrdiff_t>(k), stat.end());
  return stat[k];
}

// Per-draw log pairwise-error terms of the RCU bound; independent of the rate.
inline std::vector<double> rcu_log_terms(const ChannelModel& ch, std::size_t samples, std::uint64_t seed,
                                         unsigned workers = 1) {
  constexpr std::size_t chunk = 1 << 14;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<double> out(samples);
  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    ComplexNormal cn(1.0);
    std::vector<double> xi(ch.N);
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) {
      double mu = 0.0;
      for (std::size_t n = 0; n < ch.N; ++n) {
        const std::complex<double> x = cn(rng);
        const std::complex<double> z = std::sqrt(ch.noise_vars[n]) * cn(rng);
        mu += std::norm(z) / ch.noise_vars[n];
        xi[n] = std::norm(x + z);
      }
      const ChiSquareSum y(ch.noise_vars, xi);
      const SaddlepointResult r = detail::saddlepoint_tail(y, mu);
      out[i] = (mu <= y.mean()) ? r.log_prob : log1m_exp(r.log_prob);
    }
  });
  return out;
}

struct RcuEstimate {
  double bler = 0.0;
  double std_error = 0.0;
};

inline RcuEstimate rcu_evaluate(const std::vector<double>& log_terms, double omega, double R) {
  const double shift = omega * R * ln2;
  double s = 0.0, s2 = 0.0;
  for (double l : log_terms) {
    const double v = std::exp(std::min(0.0, shift + l));
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(log_terms.size());
  const double mean = s / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  return {mean, std::sqrt(var / std::max(1.0, n - 1.0))};
}

inline BoundResult rcu_bler(const ChannelModel& ch, double R, std::size_t samples, std::uint64_t seed,
                            unsigned workers = 1) {
  require(samples >= 100000, ErrorCode::invalid_argument, "RCU needs at least 1e5 samples");
  const RcuEstimate e = rcu_evaluate(rcu_log_terms(ch, samples, seed, workers), ch.omega, R);
  BoundResult out;
  out.method = BoundMethod::rcu;
  out.rate_bps_hz = R;
  out.bler = e.bler;
  out.diagnostics.std_error = e.std_error;
  out.diagnostics.rcu_samples = samples;
  out.diagnostics.seed = seed;
  return out;
}

// Largest R on a 1e-4 grid with RCU BLER <= Pe, for precomputed log terms.
inline double rcu_rate_from_terms(const std::vector<double>& log_terms, double omega, double Pe) {
  constexpr double step = 1e-4;
  auto ok = [&](long k) { return rcu_evaluate(log_terms, omega, k * step).bler <= Pe; };
  if (!ok(0)) return 0.0;
  long lo = 0, hi = 1024;
  while (ok(hi)) {
    lo = hi;
    hi *= 2;
    require(hi < (1L << 40), ErrorCode::invalid_argument, "RCU rate search diverged");
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (ok(mid) ? lo : hi) = mid;
  }
  return lo * step;
}

inline BoundResult rcu_rate(const ChannelModel& ch, double Pe, std::size_t samples, std::uint64_t seed,
                            unsigned workers = 1) {
  require(Pe > 0.0 && Pe < 1.0, ErrorCode::invalid_argument, "Pe must lie in (0,1)");
  require(samples >= 100000, ErrorCode::invalid_argument, "RCU needs at least 1e5 samples");
  const std::vector<double> terms = rcu_log_terms(ch, samples, seed, workers);
  const double R = rcu_rate_from_terms(terms, ch.omega, Pe);
  const RcuEstimate e = rcu_evaluate(terms, ch.omega, R);
  BoundResult out;
  out.method = BoundMethod::rcu;
  out.rate_bps_hz = R;
  out.bler = Pe;
  out.diagnostics.std_error = e.std_error;
  out.diagnostics.rcu_samples = samples;
  out.diagnostics.seed = seed;
  return out;
}

}  // namespace ftn
