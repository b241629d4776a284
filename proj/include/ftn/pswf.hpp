#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ftn/bounds.hpp"
#include "ftn/channel.hpp"
#include "ftn/error.hpp"
#include "ftn/pswf_basis.hpp"

namespace ftn {

struct Dimensions {
  std::size_t N_star = 0;
  double eta = 0.0;
};

// Largest N whose first N prolate modes leak at most eps_W of their energy on average.
inline std::size_t max_dimensions_from(std::span<const double> mu, double eps_W) {
  double leak = 0.0;
  std::size_t best = 0;
  for (std::size_t n = 0; n < mu.size(); ++n) {
    leak += 1.0 - mu[n];
    if (leak / static_cast<double>(n + 1) <= eps_W) best = n + 1;
    else break;
  }
  return best;
}

inline Dimensions max_dimensions(double omega, double eps_W) {
  require(eps_W > 0.0 && eps_W < 1.0, ErrorCode::invalid_argument, "eps_W must lie in (0,1)");
  const auto basis = cached_basis(omega);
  Dimensions d;
  d.N_star = max_dimensions_from(basis->eigenvalues, eps_W);
  d.eta = omega - static_cast<double>(d.N_star);
  return d;
}

inline double uniform_benchmark(double omega, double eps_W, double rho, double Pe) {
  const Dimensions d = max_dimensions(omega, eps_W);
  require(d.N_star >= 1, ErrorCode::infeasible, "no dimension meets the OOB constraint");
  const double s2 = static_cast<double>(d.N_star) / (rho * omega);
  return na_rate(channel_from_noise(std::vector<double>(d.N_star, s2), omega), Pe);
}

struct WaterfillResult {
  std::vector<double> power;  // per mode, noise power N0 = 1
  double theta1 = 0.0;
  double theta2 = 0.0;
  double power_residual = 0.0;  // relative
  double oob_residual = 0.0;    // relative
  bool oob_active = true;
  bool used_bisection = false;
};

namespace detail {

struct WaterfillProblem {
  std::span<const double> leak;  // 1 - mu_n
  double total;                  // P T_x = rho omega
  double eps;

  double level(double t1, double t2, std::size_t n) const { return t1 * leak[n] + t2; }

  double power(double t1, double t2, std::size_t n) const {
    const double l = level(t1, t2, n);
    return l > 0.0 ? std::max(0.0, total / l - 1.0) : std::numeric_limits<double>::infinity();
  }

  // Residuals r1 = sum P_n - total, r2 = sum P_n leak_n - eps total, and their Jacobian.
  void residuals(double t1, double t2, double r[2], double J[2][2]) const {
    r[0] = -total;
    r[1] = -eps * total;
    J[0][0] = J[0][1] = J[1][0] = J[1][1] = 0.0;
    for (std::size_t n = 0; n < leak.size(); ++n) {
      const double l = level(t1, t2, n);
      const double p = l > 0.0 ? total / l - 1.0 : std::numeric_limits<double>::infinity();
      if (p <= 0.0) continue;
      r[0] += p;
      r[1] += p * leak[n];
      const double d = total / (l * l);
      J[0][0] -= d * leak[n];
      J[0][1] -= d;
      J[1][0] -= d * leak[n] * leak[n];
      J[1][1] -= d * leak[n];
    }
  }

  double merit(double t1, double t2) const {
    double r[2], J[2][2];
    residuals(t1, t2, r, J);
    return std::hypot(r[0] / total, r[1] / (eps * total));
  }

  // theta2 meeting the power constraint for a given theta1 (power is decreasing in theta2).
  double power_level(double t1) const {
    const double lmin = *std::min_element(leak.begin(), leak.end());
    const double lo_bound = -t1 * lmin;
    auto f = [&](double t2) {
      double s = -total;
      for (std::size_t n = 0; n < leak.size(); ++n) s += power(t1, t2, n);
      return s;
    };
    double hi = std::max(1.0, lo_bound + 1.0);
    while (f(hi) > 0.0) hi = lo_bound + 2.0 * (hi - lo_bound);
    double lo = lo_bound + (hi - lo_bound) * 1e-3;
    while (f(lo) < 0.0) lo = lo_bound + (lo - lo_bound) * 1e-3;
    return solve_bracketed(f, lo, hi, 1e-15 * std::abs(hi), 1e-13 * total);
  }

  double oob_at(double t1) const {
    const double t2 = power_level(t1);
    double s = 0.0;
    for (std::size_t n = 0; n < leak.size(); ++n) s += power(t1, t2, n) * leak[n];
    return s - eps * total;
  }
};

}  // namespace detail

// Power allocation maximising sum log(1 + P_n) under the power and OOB-energy constraints.
inline WaterfillResult waterfill(std::span<const double> mu, double eps_W, double rho, double omega) {
  require(!mu.empty() && eps_W > 0.0 && rho > 0.0 && omega > 0.0, ErrorCode::invalid_argument,
          "waterfill needs modes, eps_W, rho and omega");
  std::vector<double> leak(mu.size());
  for (std::size_t n = 0; n < mu.size(); ++n) leak[n] = std::max(0.0, 1.0 - mu[n]);
  const detail::WaterfillProblem prob{leak, rho * omega, eps_W};
  const double lmin = *std::min_element(leak.begin(), leak.end());
  const double lmax = *std::max_element(leak.begin(), leak.end());
  require(lmin <= eps_W, ErrorCode::no_feasible_multipliers, "eps_W below the least leaky mode");

  WaterfillResult res;
  double t1 = 0.0, t2 = prob.power_level(0.0);
  if (lmax - lmin <= 1e-15 || prob.oob_at(0.0) <= 0.0) {
    // OOB constraint slack: plain waterfilling.
    res.oob_active = false;
  } else {
    // Damped Newton from the unconstrained allocation.
    bool converged = false;
    t1 = 1.0;
    t2 = prob.power_level(t1);
    for (int it = 0; it < 200 && !converged; ++it) {
      double r[2], J[2][2];
      prob.residuals(t1, t2, r, J);
      const double m0 = prob.merit(t1, t2);
      if (m0 <= 1e-12) {
        converged = true;
        break;
      }
      const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
      if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
      const double d1 = -(J[1][1] * r[0] - J[0][1] * r[1]) / det;
      const double d2 = -(-J[1][0] * r[0] + J[0][0] * r[1]) / det;
      double step = 1.0;
      bool moved = false;
      for (int k = 0; k < 40; ++k, step *= 0.5) {
        const double n1 = t1 + step * d1, n2 = t2 + step * d2;
        if (n1 < 0.0 || n1 * lmin + n2 <= 0.0) continue;
        if (prob.merit(n1, n2) < m0) {
          t1 = n1;
          t2 = n2;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (!converged) {
      res.used_bisection = true;
      double hi = 1.0;
      for (int i = 0; prob.oob_at(hi) > 0.0; ++i) {
        require(i < 400, ErrorCode::no_feasible_multipliers, "OOB multiplier not bracketed");
        hi *= 4.0;
      }
      // Geometric bisection on theta1; OOB energy decreases as theta1 grows.
      double lo = 0.0;
      for (int it = 0; it < 400; ++it) {
        const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
        (prob.oob_at(mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * hi) break;
      }
      t1 = 0.5 * (lo + hi);
      t2 = prob.power_level(t1);
    }
  }
  res.theta1 = t1;
  res.theta2 = t2;
  res.power.resize(mu.size());
  double ps = 0.0, os = 0.0;
  for (std::size_t n = 0; n < mu.size(); ++n) {
    res.power[n] = prob.power(t1, t2, n);
    ps += res.power[n];
    os += res.power[n] * leak[n];
  }
  res.power_residual = (ps - prob.total) / prob.total;
  res.oob_residual = (os - eps_W * prob.total) / (eps_W * prob.total);
  return res;
}

// NA rate on the active waterfilled channels (P_n >= 1e-12 P T_x).
inline double waterfill_rate(const WaterfillResult& wf, double rho, double omega, double Pe) {
  std::vector<double> s2;
  for (double p : wf.power)
    if (p >= 1e-12 * rho * omega) s2.push_back(1.0 / p);
  require(!s2.empty(), ErrorCode::no_feasible_multipliers, "no active channel");
  return na_rate(channel_from_noise(std::move(s2), omega), Pe);
}

inline double waterfill_benchmark(double omega, double eps_W, double rho, double Pe) {
  const auto basis = cached_basis(omega);
  return waterfill_rate(waterfill(basis->eigenvalues, eps_W, rho, omega), rho, omega, Pe);
}

}  // namespace ftn
