#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ftn/error.hpp"
#include "ftn/numeric.hpp"
#include "ftn/pswf_basis.hpp"

namespace ftn {

enum class PulseKind { rrc, gaussian, fourier_series, pswf_principal, sinc };

inline const char* to_string(PulseKind k) {
  switch (k) {
    case PulseKind::rrc: return "rrc";
    case PulseKind::gaussian: return "gaussian";
    case PulseKind::fourier_series: return "fourier-series";
    case PulseKind::pswf_principal: return "pswf-principal";
    case PulseKind::sinc: return "sinc";
  }
  return "unknown";
}

// Real, even, unit-energy base pulse.  Time-limited kinds carry samples on a
// uniform grid over [-Tp/2, Tp/2]; the sinc kind is band-limited and has none.
struct Pulse {
  PulseKind kind = PulseKind::rrc;
  double beta = 0.0;
  double T = 1.0;
  std::optional<double> Tp;
  double grid_step = 0.0;
  std::vector<double> samples;
  std::vector<double> fs_coeffs;
  std::function<double(double)> shape;

  bool time_limited() const { return Tp.has_value(); }
  double time_at(std::size_t i) const { return -0.5 * *Tp + static_cast<double>(i) * grid_step; }
  double operator()(double t) const { return shape(t); }
};

struct SpectralProfile {
  std::vector<double> frequencies;
  std::vector<double> magnitude_sq;
  double oob_fraction = 0.0;
};

namespace detail {

// Root-raised-cosine impulse response with unit energy before truncation.
inline double rrc_value(double t, double beta, double T) {
  const double x = t / T;
  const double scale = 1.0 / std::sqrt(T);
  if (std::abs(x) < 1e-10) return scale * (1.0 - beta + 4.0 * beta / pi);
  if (beta > 0.0 && std::abs(std::abs(x) - 0.25 / beta) < 1e-10) {
    const double a = pi / (4.0 * beta);
    return scale * beta / std::sqrt(2.0) *
           ((1.0 + 2.0 / pi) * std::sin(a) + (1.0 - 2.0 / pi) * std::cos(a));
  }
  const double num = std::sin(pi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(pi * x * (1.0 + beta));
  const double den = pi * x * (1.0 - (4.0 * beta * x) * (4.0 * beta * x));
  return scale * num / den;
}

inline double resolve_step(double grid_step, double T) { return grid_step > 0.0 ? grid_step : T / 256.0; }

// Samples `raw` symmetrically on [-Tp/2, Tp/2] and rescales to unit trapezoidal energy.
inline void sample_time_limited(Pulse& p, std::function<double(double)> raw, double Tp,
                                double requested_step) {
  auto m = static_cast<std::size_t>(std::ceil(Tp / requested_step - 1e-9));
  m = std::max<std::size_t>(m + (m % 2), 2);
  const double step = Tp / static_cast<double>(m);
  p.Tp = Tp;
  p.grid_step = step;
  p.samples.assign(m + 1, 0.0);
  for (std::size_t i = 0; i <= m / 2; ++i) {
    const double v = raw(-0.5 * Tp + static_cast<double>(i) * step);
    p.samples[i] = p.samples[m - i] = v;
  }
  double energy = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 0.5 : 1.0;
    energy += w * p.samples[i] * p.samples[i];
  }
  energy *= step;
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& v : p.samples) v *= scale;
  const double half = 0.5 * Tp * (1.0 + 1e-12);
  p.shape = [raw = std::move(raw), scale, half](double t) {
    return std::abs(t) <= half ? scale * raw(t) : 0.0;
  };
}

inline double fs_raw(const std::vector<double>& c, double Tp, double t) {
  const double w = 2.0 * pi / Tp;
  double v = c[0];
  for (std::size_t k = 1; k < c.size(); ++k) v += 2.0 * c[k] * std::cos(static_cast<double>(k) * w * t);
  return v;
}

// Fourier transform of an even sampled pulse, p^(f) = int p(t) cos(2 pi f t) dt, by
// the trapezoid rule on the sample grid.  Cosines come from a three-term recurrence.
inline double sampled_transform(const Pulse& p, double f) {
  const std::size_t m = p.samples.size() - 1;
  const std::size_t mid = m / 2;
  const double theta = 2.0 * pi * f * p.grid_step;
  const double c1 = std::cos(theta);
  double prev = c1, cur = 1.0;  // cos(-theta), cos(0)
  double s = 0.5 * p.samples[mid];
  for (std::size_t i = 1; i <= mid; ++i) {
    const double next = 2.0 * c1 * cur - prev;
    prev = cur;
    cur = next;
    const double w = (i == mid) ? 0.5 : 1.0;
    s += w * p.samples[mid + i] * cur;
  }
  return 2.0 * p.grid_step * s;
}

}  // namespace detail

// Closed forms for the cosine-series pulse c0 + 2 sum_k c_k cos(2 pi k t / Tp) on |t| <= Tp/2.
inline double fs_transform(const std::vector<double>& c, double Tp, double f) {
  const double x = f * Tp;
  double v = c[0] * sinc(x);
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double kk = static_cast<double>(k);
    v += c[k] * (sinc(x - kk) + sinc(x + kk));
  }
  return Tp * v;
}

inline double fs_autocorrelation(const std::vector<double>& c, double Tp, double lag) {
  const double d = std::abs(lag);
  if (d >= Tp) return 0.0;
  const double w = 2.0 * pi / Tp;
  double h = c[0] * c[0] * (Tp - d);
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double kw = static_cast<double>(k) * w;
    const double sk = (k % 2 == 0) ? 1.0 : -1.0;
    h -= 4.0 * c[0] * c[k] * sk * std::sin(kw * d) / kw;
  }
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double kd = static_cast<double>(k);
    for (std::size_t r = 1; r < c.size(); ++r) {
      const double rd = static_cast<double>(r);
      double g;
      if (k == r) {
        g = std::cos(kd * w * d) * (Tp - d) - std::sin(kd * w * d) / (kd * w);
      } else {
        const double sgn = ((k + r) % 2 == 0) ? 1.0 : -1.0;
        g = 2.0 * sgn * (rd * std::sin(rd * w * d) - kd * std::sin(kd * w * d)) / ((kd * kd - rd * rd) * w);
      }
      h += 2.0 * c[k] * c[r] * g;
    }
  }
  return h;
}

// Out-of-band energy of a unit-energy cosine-series pulse.
inline double fs_oob(const std::vector<double>& c, double Tp, double W) {
  const std::size_t panels = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(8.0 * W * Tp)));
  const GaussLegendre g = composite_gauss_legendre(0.0, W, panels, 16);
  double inband = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double v = fs_transform(c, Tp, g.nodes[i]);
    inband += g.weights[i] * v * v;
  }
  return std::clamp(1.0 - 2.0 * inband, 0.0, 1.0);
}

inline Pulse make_rrc(double beta, double W, double c, double grid_step = 0.0) {
  require(beta >= 0.0 && beta <= 1.0, ErrorCode::invalid_roll_off, "beta must lie in [0,1]");
  require(W > 0.0, ErrorCode::invalid_argument, "W must be positive");
  require(c >= 1.0, ErrorCode::invalid_argument, "pulse TBP c must be >= 1");
  Pulse p;
  p.kind = PulseKind::rrc;
  p.beta = beta;
  p.T = (1.0 + beta) / (2.0 * W);
  const double step = detail::resolve_step(grid_step, p.T);
  require(step <= p.T / 64.0 * (1.0 + 1e-12), ErrorCode::grid_too_coarse, "grid_step must be <= T/64");
  const double T = p.T;
  detail::sample_time_limited(p, [beta, T](double t) { return detail::rrc_value(t, beta, T); },
                              c / (2.0 * W), step);
  return p;
}

inline double gaussian_sigma(double eps_W, double W) {
  return q_inv(0.5 * eps_W) / (2.0 * std::sqrt(2.0) * pi * W);
}

// Gaussian truncated to a given width Tp (T = Tp).
inline Pulse make_gaussian_truncated(double eps_W, double W, double Tp, double grid_step = 0.0) {
  require(eps_W > 0.0 && eps_W < 1.0, ErrorCode::invalid_argument, "eps_W must lie in (0,1)");
  require(W > 0.0 && Tp > 0.0, ErrorCode::invalid_argument, "W and Tp must be positive");
  const double sigma = gaussian_sigma(eps_W, W);
  Pulse p;
  p.kind = PulseKind::gaussian;
  p.T = Tp;
  const double step = detail::resolve_step(grid_step, p.T);
  require(step <= p.T / 64.0 * (1.0 + 1e-12), ErrorCode::grid_too_coarse, "grid_step must be <= T/64");
  detail::sample_time_limited(p, [sigma](double t) { return std::exp(-t * t / (2.0 * sigma * sigma)); },
                              Tp, step);
  return p;
}

inline double oob_energy(const Pulse& p, double W);

inline Pulse make_gaussian(double eps_W, double W, double grid_step = 0.0) {
  require(eps_W > 0.0 && eps_W < 1.0, ErrorCode::invalid_argument, "eps_W must lie in (0,1)");
  const double unit = 0.5 / (2.0 * W);
  for (int k = 1; k <= 400; ++k) {
    Pulse p = make_gaussian_truncated(eps_W, W, k * unit, grid_step);
    if (oob_energy(p, W) <= eps_W) return p;
  }
  throw Error(ErrorCode::not_found, "no Gaussian width meets the OOB constraint");
}

inline double fs_energy(const std::vector<double>& coeffs, double Tp) {
  double e = coeffs.empty() ? 0.0 : coeffs[0] * coeffs[0];
  for (std::size_t k = 1; k < coeffs.size(); ++k) e += 2.0 * coeffs[k] * coeffs[k];
  return Tp * e;
}

inline std::vector<double> normalize_fs_coeffs(std::vector<double> coeffs, double Tp) {
  const double s = 1.0 / std::sqrt(fs_energy(coeffs, Tp));
  for (auto& c : coeffs) c *= s;
  return coeffs;
}

inline Pulse make_fs_pulse(std::vector<double> coeffs, double Tp, double T, double grid_step = 0.0) {
  require(!coeffs.empty(), ErrorCode::invalid_argument, "coefficient list is empty");
  require(T > 0.0 && T < Tp, ErrorCode::invalid_argument, "need 0 < T < Tp");
  const double e = fs_energy(coeffs, Tp);
  require(std::abs(e - 1.0) <= 1e-6, ErrorCode::energy_mismatch,
          "Tp(c0^2 + 2 sum c_k^2) = " + std::to_string(e));
  coeffs = normalize_fs_coeffs(std::move(coeffs), Tp);
  Pulse p;
  p.kind = PulseKind::fourier_series;
  p.T = T;
  p.fs_coeffs = coeffs;
  const double step = detail::resolve_step(grid_step, T);
  require(step <= T / 64.0 * (1.0 + 1e-12), ErrorCode::grid_too_coarse, "grid_step must be <= T/64");
  detail::sample_time_limited(p, [coeffs, Tp](double t) { return detail::fs_raw(coeffs, Tp, t); }, Tp, step);
  return p;
}

// Principal prolate spheroidal function with pulse TBP c, hard-truncated to Tp = c/(2W).
inline Pulse make_pswf_principal(double c, double W, double grid_step = 0.0) {
  require(c > 0.0 && W > 0.0, ErrorCode::invalid_argument, "c and W must be positive");
  const std::size_t q = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(6.0 * c)));
  auto basis = cached_basis(c, 1, q, true);
  Pulse p;
  p.kind = PulseKind::pswf_principal;
  p.T = c / (2.0 * W);
  const double step = detail::resolve_step(grid_step, p.T);
  require(step <= p.T / 64.0 * (1.0 + 1e-12), ErrorCode::grid_too_coarse, "grid_step must be <= T/64");
  detail::sample_time_limited(p, [basis, W](double t) { return basis->eigenfunction(0, 2.0 * W * t); },
                              p.T, step);
  return p;
}

// Ideal band-limited sinc with Nyquist spacing T = 1/(2W).
inline Pulse make_sinc(double W) {
  require(W > 0.0, ErrorCode::invalid_argument, "W must be positive");
  Pulse p;
  p.kind = PulseKind::sinc;
  p.T = 1.0 / (2.0 * W);
  const double a = std::sqrt(2.0 * W);
  p.shape = [a, W](double t) { return a * sinc(2.0 * W * t); };
  return p;
}

// Real Fourier transform p^(f) of an even pulse.
inline double fourier_transform(const Pulse& p, double f) {
  switch (p.kind) {
    case PulseKind::sinc: {
      const double band = 0.5 / p.T;
      return std::abs(f) < band ? std::sqrt(p.T) : (std::abs(f) == band ? 0.5 * std::sqrt(p.T) : 0.0);
    }
    case PulseKind::fourier_series:
      return fs_transform(p.fs_coeffs, *p.Tp, f);
    default:
      return detail::sampled_transform(p, f);
  }
}

inline double oob_energy(const Pulse& p, double W) {
  require(W > 0.0, ErrorCode::invalid_argument, "W must be positive");
  if (p.kind == PulseKind::sinc) {
    const double band = 0.5 / p.T;
    return std::max(0.0, 1.0 - std::min(W, band) / band);
  }
  const std::size_t panels = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(8.0 * W * *p.Tp)));
  const GaussLegendre g = composite_gauss_legendre(0.0, W, panels, 16);
  double inband = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double v = fourier_transform(p, g.nodes[i]);
    inband += g.weights[i] * v * v;
  }
  return std::clamp(1.0 - 2.0 * inband, 0.0, 1.0);
}

inline SpectralProfile spectrum(const Pulse& p, const std::vector<double>& f_grid, double W = 0.5) {
  require(p.time_limited() || p.kind == PulseKind::sinc, ErrorCode::invalid_argument,
          "spectrum needs a time-limited or band-limited pulse");
  SpectralProfile s;
  s.frequencies = f_grid;
  s.magnitude_sq.reserve(f_grid.size());
  for (double f : f_grid) {
    const double v = fourier_transform(p, f);
    s.magnitude_sq.push_back(v * v);
  }
  s.oob_fraction = oob_energy(p, W);
  return s;
}

// h(lag) = int p(t) p(t - lag) dt.
inline double autocorrelation_at(const Pulse& p, double lag) {
  const double d = std::abs(lag);
  if (p.kind == PulseKind::sinc) return sinc(d / p.T);
  const double Tp = *p.Tp;
  if (d >= Tp) return 0.0;
  if (p.kind == PulseKind::fourier_series) return fs_autocorrelation(p.fs_coeffs, Tp, d);
  if (d == 0.0) {
    double e = 0.0;
    const std::size_t m = p.samples.size() - 1;
    for (std::size_t i = 0; i <= m; ++i) e += ((i == 0 || i == m) ? 0.5 : 1.0) * p.samples[i] * p.samples[i];
    return e * p.grid_step;
  }
  const double a = -0.5 * Tp + d, b = 0.5 * Tp;
  const auto m = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((b - a) / p.grid_step - 1e-9)));
  const double h = (b - a) / static_cast<double>(m);
  double s = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = (i == m) ? b : a + static_cast<double>(i) * h;
    s += ((i == 0 || i == m) ? 0.5 : 1.0) * p.shape(t) * p.shape(t - d);
  }
  return s * h;
}

inline double autocorrelation(const Pulse& p, double tau, double T, long n) {
  return autocorrelation_at(p, static_cast<double>(n) * tau * T);
}

inline double autocorrelation(const Pulse& p, double tau, long n) { return autocorrelation(p, tau, p.T, n); }

struct PulseFamily {
  enum Kind { rrc, gaussian, pswf_principal, anderson_excluded } kind = rrc;
  double beta = 0.0;
};

// Member of `family` with pulse TBP c = 2 W Tp.
inline Pulse make_family_pulse(const PulseFamily& family, double c, double eps_W, double W) {
  switch (family.kind) {
    case PulseFamily::rrc: return make_rrc(family.beta, W, c);
    case PulseFamily::gaussian: return make_gaussian_truncated(eps_W, W, c / (2.0 * W));
    case PulseFamily::pswf_principal: return make_pswf_principal(c, W);
    case PulseFamily::anderson_excluded: break;
  }
  throw Error(ErrorCode::invalid_argument, "the Anderson dual-constraint pulse is not implemented");
}

// Smallest c on a 0.01 grid (from 1.00 up to 200) with oob_energy <= eps_W.
inline double min_c(const PulseFamily& family, double eps_W, double W) {
  require(eps_W > 0.0 && eps_W < 1.0, ErrorCode::invalid_argument, "eps_W must lie in (0,1)");
  require(family.kind != PulseFamily::anderson_excluded, ErrorCode::invalid_argument,
          "the Anderson dual-constraint pulse is not implemented");
  constexpr int grid_min = 100, grid_max = 20000, coarse = 25, lookahead = 4;
  auto passes = [&](int idx) { return oob_energy(make_family_pulse(family, idx / 100.0, eps_W, W), W) <= eps_W; };

  std::vector<bool> scan;
  int first = -1;
  for (int idx = grid_min; idx <= grid_max; idx += coarse) {
    scan.push_back(passes(idx));
    if (scan.back() && first < 0) first = idx;
    if (first >= 0 && idx >= first + lookahead * coarse) break;
  }
  if (first < 0) throw Error(ErrorCode::not_found, "no c <= 200 meets the OOB constraint");
  if (first == grid_min) return grid_min / 100.0;

  int changes = 0;
  for (std::size_t i = 1; i < scan.size(); ++i) changes += scan[i] != scan[i - 1];
  if (changes > 1) {
    for (int idx = grid_min; idx <= first; ++idx)
      if (passes(idx)) return idx / 100.0;
  }
  int lo = first - coarse, hi = first;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (passes(mid) ? hi : lo) = mid;
  }
  return hi / 100.0;
}

}  // namespace ftn
