#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "ftn/error.hpp"
#include "ftn/numeric.hpp"
#include "ftn/pulse.hpp"

namespace ftn {

// Diagonalized N-parallel Gaussian channel.
struct ChannelModel {
  double omega = 0.0;
  double rho = 0.0;
  double tau = 1.0;
  std::size_t N = 0;
  std::vector<double> eigenvalues;  // descending
  std::vector<double> noise_vars;   // 1 / (rho (omega/N) lambda_n)
  std::optional<Eigen::MatrixXd> eigvectors;

  std::vector<double> snr() const {
    std::vector<double> s(noise_vars.size());
    std::transform(noise_vars.begin(), noise_vars.end(), s.begin(), [](double v) { return 1.0 / v; });
    return s;
  }
};

// Number of symbols of spacing tau*T that fit in a TBP of omega.
inline std::size_t symbol_count(double omega, double c, double tau, double beta) {
  require(tau > 0.0 && tau <= 1.0, ErrorCode::invalid_argument, "tau must lie in (0,1]");
  require(omega > c, ErrorCode::pulse_exceeds_window, "omega must exceed the pulse TBP");
  const double n = (omega - c) / (tau * (1.0 + beta)) + 1.0;
  return static_cast<std::size_t>(std::floor(n + 1e-9));
}

// Same count for an arbitrary time-limited pulse: floor((Tx - Tp)/(tau T) + 1).
inline std::size_t symbol_count(const Pulse& p, double omega, double tau, double W) {
  require(p.time_limited(), ErrorCode::invalid_argument, "symbol count needs a time-limited pulse");
  require(tau > 0.0 && tau <= 1.0, ErrorCode::invalid_argument, "tau must lie in (0,1]");
  const double Tx = omega / (2.0 * W);
  require(Tx > *p.Tp, ErrorCode::pulse_exceeds_window, "omega must exceed the pulse TBP");
  return static_cast<std::size_t>(std::floor((Tx - *p.Tp) / (tau * p.T) + 1.0 + 1e-9));
}

inline Eigen::MatrixXd toeplitz(const std::vector<double>& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) H(i, j) = h[static_cast<std::size_t>(std::abs(i - j))];
  return H;
}

inline std::vector<double> autocorrelation_sequence(const Pulse& p, double tau, std::size_t N) {
  std::vector<double> h(N, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    h[n] = autocorrelation(p, tau, static_cast<long>(n));
    if (p.time_limited() && static_cast<double>(n) * tau * p.T >= *p.Tp) break;
  }
  return h;
}

inline Eigen::MatrixXd build_gram(const Pulse& p, double tau, std::size_t N) {
  require(N >= 1, ErrorCode::invalid_argument, "N must be >= 1");
  return toeplitz(autocorrelation_sequence(p, tau, N));
}

struct Eigensystem {
  std::vector<double> eigenvalues;  // descending
  Eigen::MatrixXd eigvectors;       // columns match eigenvalues
};

inline Eigensystem diagonalize(const Eigen::MatrixXd& H, bool vectors = true) {
  require(H.rows() == H.cols() && H.rows() > 0, ErrorCode::invalid_argument, "H must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, vectors ? Eigen::ComputeEigenvectors
                                                               : Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::not_positive_definite, "eigen-solve failed");
  const Eigen::Index n = H.rows();
  Eigensystem out;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()(n - 1 - i);
  require(out.eigenvalues.back() > 1e-12, ErrorCode::not_positive_definite,
          "smallest eigenvalue " + std::to_string(out.eigenvalues.back()) + " <= 1e-12");
  if (vectors) {
    out.eigvectors = es.eigenvectors().rowwise().reverse();
    const double orth = (out.eigvectors.transpose() * out.eigvectors - Eigen::MatrixXd::Identity(n, n))
                            .cwiseAbs()
                            .maxCoeff();
    require(orth <= 1e-9, ErrorCode::not_positive_definite, "eigenvectors lost orthogonality");
  }
  return out;
}

// Folded spectrum sum_k |p^(f - k/(tau T))|^2.  For time-limited pulses it is evaluated
// through the equivalent finite cosine sum tau T sum_n h_n e^{-j 2 pi f n tau T}.
class FoldedSpectrum {
 public:
  FoldedSpectrum(const Pulse& p, double tau) : pulse_(p), tau_(tau) {
    if (p.time_limited()) {
      const auto lags = static_cast<std::size_t>(std::floor(*p.Tp / (tau * p.T))) + 1;
      h_ = autocorrelation_sequence(p, tau, lags);
    }
  }

  double operator()(double f) const {
    const double ts = tau_ * pulse_.T;
    if (!pulse_.time_limited()) {
      const double band = 0.5 / pulse_.T;
      const double rate = 1.0 / ts;
      double s = 0.0;
      const auto kmin = static_cast<long>(std::floor((f - band) / rate)) - 1;
      const auto kmax = static_cast<long>(std::ceil((f + band) / rate)) + 1;
      for (long k = kmin; k <= kmax; ++k) {
        const double g = f - static_cast<double>(k) * rate;
        // An ideal band edge contributes half of the in-band power.
        if (pulse_.kind == PulseKind::sinc) {
          s += std::abs(g) < band ? pulse_.T : std::abs(g) == band ? 0.5 * pulse_.T : 0.0;
          continue;
        }
        const double v = fourier_transform(pulse_, g);
        if (std::abs(v) >= 1e-8) s += v * v;
      }
      return s;
    }
    double s = h_[0];
    for (std::size_t n = 1; n < h_.size(); ++n) s += 2.0 * h_[n] * std::cos(2.0 * pi * f * static_cast<double>(n) * ts);
    return std::max(0.0, ts * s);
  }

 private:
  Pulse pulse_;
  double tau_;
  std::vector<double> h_;
};

// Szego-type approximations lambda_n ~ (tau T)^{-1} folded(n/(N tau T)), sorted descending.
inline std::vector<double> folded_spectrum_eigs(const Pulse& p, double tau, std::size_t N) {
  const FoldedSpectrum folded(p, tau);
  const double ts = tau * p.T;
  std::vector<double> out(N);
  for (std::size_t n = 0; n < N; ++n)
    out[n] = folded(static_cast<double>(n) / (static_cast<double>(N) * ts)) / ts;
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline ChannelModel channel_from_eigenvalues(std::vector<double> eigenvalues, double omega, double rho,
                                             double tau = 1.0) {
  require(!eigenvalues.empty(), ErrorCode::invalid_argument, "no eigenvalues");
  require(omega > 0.0 && rho > 0.0, ErrorCode::invalid_argument, "omega and rho must be positive");
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
  ChannelModel ch;
  ch.omega = omega;
  ch.rho = rho;
  ch.tau = tau;
  ch.N = eigenvalues.size();
  const double per = rho * omega / static_cast<double>(ch.N);
  ch.noise_vars.reserve(ch.N);
  for (double l : eigenvalues) ch.noise_vars.push_back(1.0 / (per * l));
  ch.eigenvalues = std::move(eigenvalues);
  return ch;
}

// Flat channel with the given noise variances (omega fixed by the caller).
inline ChannelModel channel_from_noise(std::vector<double> noise_vars, double omega) {
  ChannelModel ch;
  ch.omega = omega;
  ch.N = noise_vars.size();
  ch.noise_vars = std::move(noise_vars);
  ch.eigenvalues.assign(ch.N, 1.0);
  return ch;
}

struct ChannelOptions {
  std::optional<double> eps_W;        // enforce oob_energy(p, W) <= eps_W
  std::optional<std::size_t> symbols; // override the symbol count
  bool eigvectors = false;
};

inline ChannelModel make_channel(const Pulse& p, double omega, double rho, double tau, double W,
                                 const ChannelOptions& opt = {}) {
  require(rho > 0.0, ErrorCode::invalid_argument, "rho must be positive");
  if (opt.eps_W)
    require(oob_energy(p, W) <= *opt.eps_W * (1.0 + 1e-9), ErrorCode::invalid_argument,
            "pulse violates the OOB constraint");
  std::size_t N;
  if (opt.symbols) {
    N = *opt.symbols;
  } else if (p.time_limited()) {
    N = symbol_count(p, omega, tau, W);
  } else {
    require(tau > 0.0 && tau <= 1.0, ErrorCode::invalid_argument, "tau must lie in (0,1]");
    N = static_cast<std::size_t>(std::floor(omega / (2.0 * W) / (tau * p.T) + 1e-9));
  }
  require(N >= 1, ErrorCode::invalid_argument, "no symbol fits");
  Eigensystem es = diagonalize(build_gram(p, tau, N), opt.eigvectors);
  ChannelModel ch = channel_from_eigenvalues(std::move(es.eigenvalues), omega, rho, tau);
  if (opt.eigvectors) ch.eigvectors = std::move(es.eigvectors);
  return ch;
}

namespace detail {

// int_0^X sinc^2(x) dx.
inline double sinc2_integral(double X) {
  const double ax = std::abs(X);
  double v;
  if (ax < 1e-6) {
    v = ax;
  } else {
    const double s = std::sin(pi * ax);
    v = sine_integral(2.0 * pi * ax) / pi - s * s / (pi * pi * ax);
  }
  return X < 0.0 ? -v : v;
}

}  // namespace detail

// Energy fraction of a block of N sinc pulses lying outside [-Tx/2, Tx/2], block centred.
inline double ooi_fraction(const Pulse& p, double tau, double Tx, std::size_t N) {
  require(p.kind == PulseKind::sinc, ErrorCode::invalid_argument, "OOI model needs a sinc pulse");
  const double W = 0.5 / p.T;
  const double ts = tau * p.T;
  const double centre = 0.5 * static_cast<double>(N - 1) * ts;
  double inside = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double tn = static_cast<double>(n) * ts - centre;
    inside += detail::sinc2_integral(2.0 * W * (0.5 * Tx - tn)) - detail::sinc2_integral(2.0 * W * (-0.5 * Tx - tn));
  }
  return 1.0 - inside / static_cast<double>(N);
}

// Largest N (found by incrementing) with OOI energy <= eps_T; capped at 4 Tx/(tau T) + 1.
inline std::size_t ooi_max_blocklength(const Pulse& p, double tau, double Tx, double eps_T) {
  require(eps_T > 0.0 && eps_T < 1.0, ErrorCode::invalid_argument, "eps_T must lie in (0,1)");
  require(tau > 0.0 && tau <= 1.0 && Tx > 0.0, ErrorCode::invalid_argument, "bad tau or Tx");
  const auto cap = static_cast<std::size_t>(std::floor(4.0 * Tx / (tau * p.T))) + 1;
  std::size_t best = 0;
  for (std::size_t N = 1; N <= cap; ++N) {
    if (ooi_fraction(p, tau, Tx, N) <= eps_T) best = N;
    else break;
  }
  return best;
}

}  // namespace ftn
