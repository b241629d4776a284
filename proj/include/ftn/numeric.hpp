#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "ftn/error.hpp"

namespace ftn {

inline constexpr double pi = std::numbers::pi;
inline constexpr double log2e = std::numbers::log2e;
inline constexpr double ln2 = std::numbers::ln2;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Normalized sinc, sin(pi x)/(pi x).
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - (pi * x) * (pi * x) / 6.0;
  return std::sin(pi * x) / (pi * x);
}

// Gaussian tail Q(x) = P[N(0,1) > x].
inline double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
}

// ln Q(x), finite for every real x.
inline double log_q(double x) {
  if (x < 0.0) return std::log1p(-q_func(-x));
  if (x < 30.0) return std::log(q_func(x));
  const double r = 1.0 / (x * x);
  const double series =
      1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 + r * (-945.0 + r * 10395.0)))));
  return -0.5 * x * x - std::log(x * std::sqrt(2.0 * pi)) + std::log(series);
}

// ln(1 - e^x) for x < 0.
inline double log1m_exp(double x) {
  if (x > -ln2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

namespace detail {

// Acklam's rational approximation to the standard normal quantile.
inline double acklam_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  const double lo = 0.02425;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - lo) return -acklam_quantile(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

// Inverse of Q: returns x with Q(x) = p.
inline double q_inv(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::invalid_argument, "q_inv needs p in (0,1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -q_inv(1.0 - p);
  double x = -detail::acklam_quantile(p);
  const double target = std::log(p);
  // Newton on ln Q(x) = ln p; the slope is -phi(x)/Q(x).
  for (int it = 0; it < 8; ++it) {
    const double lq = log_q(x);
    const double step = (lq - target) / (-std::exp(std::log(normal_pdf(x)) - lq));
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule mapped to [a, b].
inline GaussLegendre gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0) {
  require(n >= 1, ErrorCode::invalid_argument, "gauss_legendre needs n >= 1");
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    g.nodes[i] = mid - half * z;
    g.nodes[n - 1 - i] = mid + half * z;
    g.weights[i] = g.weights[n - 1 - i] = half * w;
  }
  return g;
}

// Composite rule: `panels` equal panels of `order` Gauss-Legendre nodes each.
inline GaussLegendre composite_gauss_legendre(double a, double b, std::size_t panels,
                                              std::size_t order) {
  const GaussLegendre ref = gauss_legendre(order);
  GaussLegendre g;
  g.nodes.reserve(panels * order);
  g.weights.reserve(panels * order);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    for (std::size_t i = 0; i < order; ++i) {
      g.nodes.push_back(lo + 0.5 * h * (ref.nodes[i] + 1.0));
      g.weights.push_back(0.5 * h * ref.weights[i]);
    }
  }
  return g;
}

// Root of a monotone function on a bracket [lo, hi] with f(lo), f(hi) of opposite sign.
// Illinois-modified regula falsi, bisecting whenever the secant stalls.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double xtol, double ftol = 0.0,
                       int max_iter = 300) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  require((flo < 0.0) != (fhi < 0.0), ErrorCode::no_root, "root is not bracketed");
  int side = 0;
  for (int it = 0; it < max_iter; ++it) {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > std::min(lo, hi) && x < std::max(lo, hi)) || it % 4 == 3) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (std::abs(fx) <= ftol) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (std::abs(hi - lo) <= xtol) break;
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

// Wilson score interval for k successes out of n at normal quantile z.
inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

// Sine integral Si(x) = int_0^x sin(t)/t dt.
inline double sine_integral(double x) {
  const double ax = std::abs(x);
  double si;
  if (ax <= 4.0) {
    double term = ax, sum = ax;
    const double x2 = ax * ax;
    for (int k = 1; k < 60; ++k) {
      term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      const double add = term / (2.0 * k + 1.0);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    si = sum;
  } else {
    // Continued fraction for E1(i x) (modified Lentz), giving Si via the imaginary part.
    double br = 1.0, bi = ax;
    double cr = 1.0 / std::numeric_limits<double>::min(), ci = 0.0;
    double dd = br * br + bi * bi;
    double dr = br / dd, di = -bi / dd;
    double hr = dr, hi = di;
    for (int i = 2; i < 200; ++i) {
      const double a = -static_cast<double>((i - 1) * (i - 1));
      br += 2.0;
      // d = 1 / (a d + b)
      double tr = a * dr + br, ti = a * di + bi;
      dd = tr * tr + ti * ti;
      dr = tr / dd;
      di = -ti / dd;
      // c = b + a / c
      dd = cr * cr + ci * ci;
      const double qr = cr / dd, qi = -ci / dd;
      cr = br + a * qr;
      ci = bi + a * qi;
      const double delr = cr * dr - ci * di, deli = cr * di + ci * dr;
      const double nhr = hr * delr - hi * deli;
      hi = hr * deli + hi * delr;
      hr = nhr;
      if (std::abs(delr - 1.0) + std::abs(deli) < 1e-16) break;
    }
    // h = h * (cos x - i sin x)
    const double c = std::cos(ax), s = std::sin(ax);
    const double er = hr * c + hi * s;
    const double ei = hi * c - hr * s;
    (void)er;
    si = 0.5 * pi + ei;
  }
  return x < 0.0 ? -si : si;
}

}  // namespace ftn
