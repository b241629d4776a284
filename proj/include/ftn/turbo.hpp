#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ftn/channel.hpp"
#include "ftn/error.hpp"
#include "ftn/log.hpp"
#include "ftn/numeric.hpp"
#include "ftn/pulse.hpp"
#include "ftn/random.hpp"

namespace ftn::turbo {

using Bits = std::vector<std::uint8_t>;
using Symbols = std::vector<std::complex<double>>;

enum class LlrRole { apriori, extrinsic, aposteriori };

// Natural-log LLRs, positive favouring bit 0.
struct LlrVector {
  std::vector<double> values;
  LlrRole role = LlrRole::extrinsic;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

// Unit-memory recursive code with feedback 1 + D: w_k = b_k xor w_{k-1}.  The coded
// output is (ff_now * w_k) xor (ff_prev * w_{k-1}), preceded by b_k when systematic.
struct Memory1Code {
  bool systematic = false;
  bool ff_now = true;
  bool ff_prev = false;

  std::size_t outputs() const { return systematic ? 2 : 1; }
};

inline constexpr Memory1Code default_rsc{true, false, true};
inline constexpr Memory1Code default_urc{false, true, false};

struct CodingConfig {
  std::size_t info_bits = 128;
  Memory1Code rsc = default_rsc;
  Memory1Code urc = default_urc;
  std::uint64_t interleaver1_seed = 1;
  std::uint64_t interleaver2_seed = 2;
  std::size_t equalizer_memory = 3;
  std::size_t inner_iterations = 5;
  std::size_t outer_iterations = 30;
  bool early_stop = false;
  double stop_llr = 10.0;  // early stop also needs every info APP at least this reliable
  double omega = 132.0;
  double tau = 0.4859;
  double beta = 1.0;
  double c = 0.0;  // pulse TBP; 0 selects the smallest c meeting eps_W
  double eps_W = 1e-4;
  double W = 0.5;
};

inline Bits encode(const Memory1Code& code, const Bits& bits) {
  Bits out;
  out.reserve(bits.size() * code.outputs());
  std::uint8_t state = 0;
  for (std::uint8_t b : bits) {
    const std::uint8_t w = b ^ state;
    if (code.systematic) out.push_back(b);
    out.push_back(static_cast<std::uint8_t>((code.ff_now ? w : 0) ^ (code.ff_prev ? state : 0)));
    state = w;
  }
  return out;
}

inline Bits rsc_encode(const Bits& bits, const Memory1Code& code = default_rsc) { return encode(code, bits); }
inline Bits urc_encode(const Bits& bits, const Memory1Code& code = default_urc) { return encode(code, bits); }

// Deterministic trellis branches (the first parity bit of a zero-started code) give
// infinite LLRs; outputs are clipped to keep every exchanged value finite.
inline constexpr double llr_limit = 1e4;

inline double clip_llr(double v) { return std::clamp(v, -llr_limit, llr_limit); }

struct SisoOutput {
  LlrVector info_extrinsic;
  LlrVector coded_extrinsic;
  LlrVector info_app;
};

// Log-MAP BCJR on the two-state trellis.  The encoder starts in state 0 and is not
// terminated, so the final backward metrics are uniform.
inline SisoOutput siso_decode(const Memory1Code& code, const std::vector<double>& la_info,
                              const std::vector<double>& la_coded) {
  const std::size_t K = la_info.size();
  const std::size_t no = code.outputs();
  require(la_coded.size() == K * no, ErrorCode::invalid_argument, "coded LLR length mismatch");
  constexpr double ninf = -std::numeric_limits<double>::infinity();

  auto branch = [&](std::size_t k, int s, int b, int out[2]) {
    const int w = b ^ s;
    int j = 0;
    if (code.systematic) out[j++] = b;
    out[j] = (code.ff_now ? w : 0) ^ (code.ff_prev ? s : 0);
    double g = (b == 0 ? 0.5 : -0.5) * la_info[k];
    for (std::size_t i = 0; i < no; ++i) g += (out[i] == 0 ? 0.5 : -0.5) * la_coded[k * no + i];
    return g;
  };

  std::vector<std::array<double, 2>> alpha(K + 1), beta(K + 1);
  alpha[0] = {0.0, ninf};
  for (std::size_t k = 0; k < K; ++k) {
    std::array<double, 2> next{ninf, ninf};
    int out[2];
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < 2; ++b) {
        const double g = branch(k, s, b, out);
        next[b ^ s] = log_sum_exp(next[b ^ s], alpha[k][s] + g);
      }
    const double m = std::max(next[0], next[1]);
    alpha[k + 1] = {next[0] - m, next[1] - m};
  }
  beta[K] = {0.0, 0.0};
  for (std::size_t k = K; k-- > 0;) {
    std::array<double, 2> prev{ninf, ninf};
    int out[2];
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < 2; ++b) prev[s] = log_sum_exp(prev[s], branch(k, s, b, out) + beta[k + 1][b ^ s]);
    const double m = std::max(prev[0], prev[1]);
    beta[k] = {prev[0] - m, prev[1] - m};
  }

  SisoOutput r;
  r.info_app.values.resize(K);
  r.info_app.role = LlrRole::aposteriori;
  r.info_extrinsic.values.resize(K);
  r.coded_extrinsic.values.resize(K * no);
  for (std::size_t k = 0; k < K; ++k) {
    double pb[2] = {ninf, ninf};
    double pc[2][2] = {{ninf, ninf}, {ninf, ninf}};
    int out[2];
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < 2; ++b) {
        const double m = alpha[k][s] + branch(k, s, b, out) + beta[k + 1][b ^ s];
        pb[b] = log_sum_exp(pb[b], m);
        for (std::size_t i = 0; i < no; ++i) pc[i][out[i]] = log_sum_exp(pc[i][out[i]], m);
      }
    r.info_app[k] = clip_llr(pb[0] - pb[1]);
    r.info_extrinsic[k] = clip_llr(pb[0] - pb[1] - la_info[k]);
    for (std::size_t i = 0; i < no; ++i)
      r.coded_extrinsic[k * no + i] = clip_llr(pc[i][0] - pc[i][1] - la_coded[k * no + i]);
  }
  return r;
}

// Bits recovered from a-posteriori LLRs of the code inputs.
inline Bits hard_decision(const std::vector<double>& llr) {
  Bits b(llr.size());
  for (std::size_t i = 0; i < llr.size(); ++i) b[i] = llr[i] < 0.0 ? 1 : 0;
  return b;
}

inline std::size_t s_random_spread(std::size_t l) {
  return static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(l) / 2.0)));
}

inline bool has_s_property(const std::vector<std::size_t>& perm, std::size_t S) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size() && j < i + S; ++j) {
      const auto d = perm[i] > perm[j] ? perm[i] - perm[j] : perm[j] - perm[i];
      if (d < S) return false;
    }
  return true;
}

namespace detail {

// Whether value v at position pos keeps distance >= S from every entry in its window,
// looking only at positions <= lim.
inline bool s_fits(const std::vector<std::size_t>& p, std::size_t pos, std::size_t v, std::size_t S, std::size_t lim) {
  const std::size_t lo = pos >= S - 1 ? pos - (S - 1) : 0;
  const std::size_t hi = std::min(lim, pos + S - 1);
  for (std::size_t q = lo; q <= hi; ++q) {
    if (q == pos) continue;
    if ((p[q] > v ? p[q] - v : v - p[q]) < S) return false;
  }
  return true;
}

// One sweep over a shuffled permutation: a conflicting entry is swapped with a later one
// that fits, or failing that with an earlier one when both positions stay valid.
inline bool s_random_attempt(std::vector<std::size_t>& p, std::size_t S, Rng& rng) {
  const std::size_t l = p.size();
  std::shuffle(p.begin(), p.end(), rng);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < l; ++i) {
    if (s_fits(p, i, p[i], S, i)) continue;
    std::size_t j = i + 1;
    while (j < l && !s_fits(p, i, p[j], S, i)) ++j;
    if (j < l) {
      std::swap(p[i], p[j]);
      continue;
    }
    order.resize(i);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    bool repaired = false;
    for (std::size_t k : order) {
      std::swap(p[i], p[k]);
      if (s_fits(p, i, p[i], S, i) && s_fits(p, k, p[k], S, i)) {
        repaired = true;
        break;
      }
      std::swap(p[i], p[k]);
    }
    if (!repaired) return false;
  }
  return true;
}

}  // namespace detail

// Permutation with |pi(i) - pi(j)| >= S whenever |i - j| < S, by randomized sweeps
// with restart; seed-deterministic.
inline std::vector<std::size_t> s_random_interleaver(std::size_t l, std::uint64_t seed, std::size_t S = 0) {
  require(l >= 8, ErrorCode::invalid_argument, "interleaver length must be >= 8");
  if (S == 0) S = s_random_spread(l);
  Rng rng(derive_seed(seed, 0x5eed));
  std::vector<std::size_t> perm(l);
  for (;;) {
    if (S <= 1) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      return perm;
    }
    for (int attempt = 0; attempt < 100000; ++attempt) {
      std::iota(perm.begin(), perm.end(), 0);
      if (detail::s_random_attempt(perm, S, rng)) return perm;
    }
    log_warning("S-random search for l=" + std::to_string(l) + " failed at S=" + std::to_string(S) +
                " after 1e5 attempts; retrying with S=" + std::to_string(S - 1));
    --S;
  }
}

template <class T>
std::vector<T> interleave(const std::vector<T>& in, const std::vector<std::size_t>& perm) {
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = in[perm[i]];
  return out;
}

template <class T>
std::vector<T> deinterleave(const std::vector<T>& in, const std::vector<std::size_t>& perm) {
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[perm[i]] = in[i];
  return out;
}

// Gray QPSK: bit 2n drives the real sign, bit 2n+1 the imaginary sign, unit energy.
inline std::complex<double> qpsk_point(int d) {
  const double a = 1.0 / std::sqrt(2.0);
  return {(d & 1) ? -a : a, (d & 2) ? -a : a};
}

inline Symbols qpsk_map(const Bits& bits) {
  require(bits.size() % 2 == 0, ErrorCode::invalid_argument, "QPSK needs an even bit count");
  Symbols x(bits.size() / 2);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = qpsk_point(bits[2 * n] | (bits[2 * n + 1] << 1));
  return x;
}

// Symbol-wise AWGN demapper for y = x + n, E|n|^2 = nu.
inline LlrVector qpsk_demap(const Symbols& y, double nu) {
  LlrVector l;
  l.values.resize(2 * y.size());
  const double g = 2.0 * std::sqrt(2.0) / nu;
  for (std::size_t n = 0; n < y.size(); ++n) {
    l[2 * n] = g * y[n].real();
    l[2 * n + 1] = g * y[n].imag();
  }
  return l;
}

// Matched-filter FTN link y = sqrt(rho omega / N) H x + z with cov(z) = H.
class FtnLink {
 public:
  FtnLink(const Pulse& p, double tau, double omega, std::size_t N) : omega_(omega), N_(N) {
    H_ = build_gram(p, tau, N);
    Eigensystem es = diagonalize(H_, true);
    lambda_ = es.eigenvalues;
    colour_ = es.eigvectors;
    for (Eigen::Index j = 0; j < colour_.cols(); ++j) colour_.col(j) *= std::sqrt(lambda_[static_cast<std::size_t>(j)]);
    taps_.assign(N, 0.0);
    for (std::size_t l = 0; l < N; ++l) taps_[l] = H_(static_cast<Eigen::Index>(l), 0);
  }

  std::size_t symbols() const { return N_; }
  double omega() const { return omega_; }
  const Eigen::MatrixXd& gram() const { return H_; }
  const std::vector<double>& eigenvalues() const { return lambda_; }
  double amplitude(double rho) const { return std::sqrt(rho * omega_ / static_cast<double>(N_)); }

  // First L+1 autocorrelation taps h_0..h_L.
  std::vector<double> taps(std::size_t L) const {
    return {taps_.begin(), taps_.begin() + static_cast<std::ptrdiff_t>(std::min(L + 1, N_))};
  }

  Symbols transmit(const Symbols& x, double rho, Rng& rng) const {
    require(x.size() == N_, ErrorCode::invalid_argument, "symbol count mismatch");
    const auto n = static_cast<Eigen::Index>(N_);
    Eigen::VectorXcd xv(n), w(n);
    ComplexNormal cn(1.0);
    for (Eigen::Index i = 0; i < n; ++i) xv(i) = x[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < n; ++i) w(i) = cn(rng);
    const Eigen::VectorXcd y = amplitude(rho) * (H_.cast<std::complex<double>>() * xv) +
                               colour_.cast<std::complex<double>>() * w;
    return {y.data(), y.data() + n};
  }

 private:
  double omega_;
  std::size_t N_;
  Eigen::MatrixXd H_;
  Eigen::MatrixXd colour_;  // U Lambda^{1/2}
  std::vector<double> lambda_;
  std::vector<double> taps_;
};

inline Symbols ftn_transmit(const Symbols& symbols, const Pulse& p, double tau, double rho, double omega,
                            std::uint64_t seed) {
  const FtnLink link(p, tau, omega, symbols.size());
  Rng rng(derive_seed(seed, 0));
  return link.transmit(symbols, rho, rng);
}

namespace detail {

// Log branch metrics of the Ungerboeck trellis, split into a per-step observation part
// obs[n][d] and a state-dependent ISI part isi[depth][s*4+d].  Symbols before the block
// start are absent, so steps n < L use the table of depth n.
struct UngerboeckMetrics {
  std::size_t L = 0;
  std::size_t S = 1;
  std::vector<std::array<double, 4>> chan;   // observation term alone
  std::vector<std::array<double, 4>> obs;    // observation plus a-priori
  std::vector<std::vector<double>> isi;

  double operator()(std::size_t n, std::size_t s, int d) const { return obs[n][d] + isi[std::min(n, L)][s * 4 + d]; }
  std::size_t next(std::size_t s, int d) const { return static_cast<std::size_t>(d) + 4 * (s & ((S >> 2) - 1)); }
};

inline UngerboeckMetrics ungerboeck_metrics(const Symbols& y, const std::vector<double>& taps, double nu,
                                            const LlrVector& apriori) {
  UngerboeckMetrics m;
  m.L = taps.size() - 1;
  m.S = std::size_t{1} << (2 * m.L);
  std::array<std::complex<double>, 4> pts;
  for (int d = 0; d < 4; ++d) pts[d] = qpsk_point(d);
  m.isi.assign(m.L + 1, std::vector<double>(m.S * 4));
  for (std::size_t depth = 0; depth <= m.L; ++depth)
    for (std::size_t s = 0; s < m.S; ++s) {
      std::complex<double> sum = 0.0;
      std::size_t st = s;
      for (std::size_t l = 1; l <= depth; ++l, st >>= 2) sum += taps[l] * pts[st & 3];
      for (int d = 0; d < 4; ++d) m.isi[depth][s * 4 + d] = -(2.0 / nu) * (std::conj(pts[d]) * sum).real();
    }
  m.chan.resize(y.size());
  m.obs.resize(y.size());
  for (std::size_t n = 0; n < y.size(); ++n)
    for (int d = 0; d < 4; ++d) {
      m.chan[n][d] = (2.0 * (std::conj(pts[d]) * y[n]).real() - taps[0] * std::norm(pts[d])) / nu;
      m.obs[n][d] = m.chan[n][d] + ((d & 1) ? -0.5 : 0.5) * apriori[2 * n] + ((d & 2) ? -0.5 : 0.5) * apriori[2 * n + 1];
    }
  return m;
}

// `logp` holds per-symbol log metrics with the current symbol's a-priori removed, so
// each bit's extrinsic only adds back the a-priori of its partner bit.
inline LlrVector symbol_to_bit_extrinsic(const std::vector<std::array<double, 4>>& logp, const LlrVector& apriori) {
  LlrVector out;
  out.values.resize(2 * logp.size());
  for (std::size_t n = 0; n < logp.size(); ++n) {
    const auto& p = logp[n];
    const double h0 = 0.5 * apriori[2 * n], h1 = 0.5 * apriori[2 * n + 1];
    out[2 * n] = clip_llr(log_sum_exp(p[0] + h1, p[2] - h1) - log_sum_exp(p[1] + h1, p[3] - h1));
    out[2 * n + 1] = clip_llr(log_sum_exp(p[0] + h0, p[1] - h0) - log_sum_exp(p[2] + h0, p[3] - h0));
  }
  return out;
}

// Probability-domain forward-backward with per-step normalization.  Each factor is
// shifted by its own maximum, so extreme SNR can underflow whole steps; returns false then.
inline bool equalize_scaled(const UngerboeckMetrics& m, std::vector<std::array<double, 4>>& logp) {
  const std::size_t N = m.obs.size(), S = m.S;
  std::vector<std::vector<double>> isi(m.isi.size(), std::vector<double>(S * 4));
  for (std::size_t k = 0; k < m.isi.size(); ++k) {
    const double mx = *std::max_element(m.isi[k].begin(), m.isi[k].end());
    for (std::size_t i = 0; i < S * 4; ++i) isi[k][i] = std::exp(m.isi[k][i] - mx);
  }
  std::vector<std::array<double, 4>> obs(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double mx = *std::max_element(m.obs[n].begin(), m.obs[n].end());
    for (int d = 0; d < 4; ++d) obs[n][d] = std::exp(m.obs[n][d] - mx);
  }
  const std::size_t mask = (S >> 2) - 1;

  std::vector<double> alpha((N + 1) * S, 0.0), beta((N + 1) * S);
  std::fill(alpha.begin(), alpha.begin() + static_cast<std::ptrdiff_t>(S), 1.0 / static_cast<double>(S));
  for (std::size_t n = 0; n < N; ++n) {
    const double* a = &alpha[n * S];
    double* an = &alpha[(n + 1) * S];
    const double* tab = isi[std::min(n, m.L)].data();
    const auto& o = obs[n];
    for (std::size_t s = 0; s < S; ++s) {
      if (a[s] == 0.0) continue;
      double* dst = an + 4 * (s & mask);
      const double* g = tab + 4 * s;
      for (int d = 0; d < 4; ++d) dst[d] += a[s] * o[d] * g[d];
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) sum += an[s];
    if (!(sum > 0.0) || !std::isfinite(sum)) return false;
    const double inv = 1.0 / sum;
    for (std::size_t s = 0; s < S; ++s) an[s] *= inv;
  }
  std::fill(beta.begin() + static_cast<std::ptrdiff_t>(N * S), beta.end(), 1.0 / static_cast<double>(S));
  for (std::size_t n = N; n-- > 0;) {
    const double* bn = &beta[(n + 1) * S];
    double* b = &beta[n * S];
    const double* tab = isi[std::min(n, m.L)].data();
    const auto& o = obs[n];
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double* src = bn + 4 * (s & mask);
      const double* g = tab + 4 * s;
      const double v = o[0] * g[0] * src[0] + o[1] * g[1] * src[1] + o[2] * g[2] * src[2] + o[3] * g[3] * src[3];
      b[s] = v;
      sum += v;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) return false;
    const double inv = 1.0 / sum;
    for (std::size_t s = 0; s < S; ++s) b[s] *= inv;
  }
  logp.assign(N, {});
  for (std::size_t n = 0; n < N; ++n) {
    std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};
    const double* a = &alpha[n * S];
    const double* bn = &beta[(n + 1) * S];
    const auto& tab = isi[std::min(n, m.L)];
    for (std::size_t s = 0; s < S; ++s) {
      const double* src = bn + 4 * (s & mask);
      for (int d = 0; d < 4; ++d) p[d] += a[s] * tab[s * 4 + d] * src[d];
    }
    if (!(p[0] + p[1] + p[2] + p[3] > 0.0)) return false;
    for (int d = 0; d < 4; ++d) logp[n][d] = std::log(std::max(p[d], 1e-300)) + m.chan[n][d];
  }
  return true;
}

// Same recursion with log-sum-exp throughout.
inline void equalize_log(const UngerboeckMetrics& m, std::vector<std::array<double, 4>>& logp) {
  const std::size_t N = m.obs.size(), S = m.S;
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> alpha((N + 1) * S, ninf), beta((N + 1) * S, 0.0);
  std::fill(alpha.begin(), alpha.begin() + static_cast<std::ptrdiff_t>(S), 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t s = 0; s < S; ++s)
      for (int d = 0; d < 4; ++d) {
        double& t = alpha[(n + 1) * S + m.next(s, d)];
        t = log_sum_exp(t, alpha[n * S + s] + m(n, s, d));
      }
    const double mx = *std::max_element(alpha.begin() + static_cast<std::ptrdiff_t>((n + 1) * S),
                                        alpha.begin() + static_cast<std::ptrdiff_t>((n + 2) * S));
    for (std::size_t s = 0; s < S; ++s) alpha[(n + 1) * S + s] -= mx;
  }
  for (std::size_t n = N; n-- > 0;) {
    double mx = ninf;
    for (std::size_t s = 0; s < S; ++s) {
      double v = ninf;
      for (int d = 0; d < 4; ++d) v = log_sum_exp(v, m(n, s, d) + beta[(n + 1) * S + m.next(s, d)]);
      beta[n * S + s] = v;
      mx = std::max(mx, v);
    }
    for (std::size_t s = 0; s < S; ++s) beta[n * S + s] -= mx;
  }
  logp.assign(N, {ninf, ninf, ninf, ninf});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t s = 0; s < S; ++s)
      for (int d = 0; d < 4; ++d)
        logp[n][d] = log_sum_exp(logp[n][d], alpha[n * S + s] + m.isi[std::min(n, m.L)][s * 4 + d] +
                                                 beta[(n + 1) * S + m.next(s, d)]);
    for (int d = 0; d < 4; ++d) logp[n][d] += m.chan[n][d];
  }
}

}  // namespace detail

// Ungerboeck-metric MAP equalizer on the 4^L-state trellis of the last L symbols.
// `y` and `taps` are in units where y = H x + z with cov(z) = nu H.  Returns per-bit
// extrinsic LLRs (a-posteriori minus a-priori).
inline LlrVector map_equalize(const Symbols& y, const std::vector<double>& taps, double nu,
                              const LlrVector& apriori) {
  require(!taps.empty(), ErrorCode::invalid_argument, "need at least h_0");
  require(taps.size() - 1 <= 8, ErrorCode::memory_too_large, "equalizer memory above 8");
  require(nu > 0.0, ErrorCode::invalid_argument, "noise scale must be positive");
  require(apriori.size() == 2 * y.size(), ErrorCode::invalid_argument, "a-priori length mismatch");
  // A memoryless channel runs on the one-symbol trellis with a zero tap.
  std::vector<double> h = taps;
  if (h.size() == 1) h.push_back(0.0);
  const auto m = detail::ungerboeck_metrics(y, h, nu, apriori);
  std::vector<std::array<double, 4>> logp;
  if (!detail::equalize_scaled(m, logp)) detail::equalize_log(m, logp);
  return detail::symbol_to_bit_extrinsic(logp, apriori);
}

// QPSK symbols per frame.
inline std::size_t frame_symbols(const CodingConfig& cfg) {
  return cfg.info_bits * cfg.rsc.outputs() * cfg.urc.outputs() / 2;
}

struct Interleavers {
  std::vector<std::size_t> outer;  // RSC output -> URC input
  std::vector<std::size_t> inner;  // URC output -> modulator
};

inline Interleavers make_interleavers(const CodingConfig& cfg) {
  const std::size_t l = cfg.info_bits * cfg.rsc.outputs();
  return {s_random_interleaver(l, cfg.interleaver1_seed), s_random_interleaver(l * cfg.urc.outputs(), cfg.interleaver2_seed)};
}

// Transmit-side chain: info bits -> RSC -> pi1 -> URC -> pi2 -> QPSK.
inline Symbols encode_frame(const Bits& info, const CodingConfig& cfg, const Interleavers& il) {
  return qpsk_map(interleave(urc_encode(interleave(rsc_encode(info, cfg.rsc), il.outer), cfg.urc), il.inner));
}

struct DecodeResult {
  Bits bits;
  std::size_t outer_iterations = 0;
};

// Three-stage turbo receiver on normalized observations (y = H x + z, cov(z) = nu H).
inline DecodeResult three_stage_receive(const Symbols& y, const std::vector<double>& taps, double nu,
                                        const CodingConfig& cfg, const Interleavers& il) {
  const std::size_t nbits = 2 * y.size();
  LlrVector la_eq{std::vector<double>(nbits, 0.0), LlrRole::apriori};
  std::vector<double> la_urc_info(nbits, 0.0);
  DecodeResult res;
  Bits previous;
  for (std::size_t outer = 0; outer < cfg.outer_iterations; ++outer) {
    SisoOutput urc;
    for (std::size_t inner = 0; inner < cfg.inner_iterations; ++inner) {
      const LlrVector le_eq = map_equalize(y, taps, nu, la_eq);
      urc = siso_decode(cfg.urc, la_urc_info, deinterleave(le_eq.values, il.inner));
      la_eq.values = interleave(urc.coded_extrinsic.values, il.inner);
    }
    const std::vector<double> la_rsc = deinterleave(urc.info_extrinsic.values, il.outer);
    const SisoOutput rsc = siso_decode(cfg.rsc, std::vector<double>(cfg.info_bits, 0.0), la_rsc);
    la_urc_info = interleave(rsc.coded_extrinsic.values, il.outer);
    res.bits = hard_decision(rsc.info_app.values);
    res.outer_iterations = outer + 1;
    double weakest = INFINITY;
    for (double v : rsc.info_app.values) weakest = std::min(weakest, std::abs(v));
    if (cfg.early_stop && res.bits == previous && weakest >= cfg.stop_llr) break;
    previous = res.bits;
  }
  return res;
}

struct BlerPoint {
  double snr_db = 0.0;
  std::size_t blocks = 0;
  std::size_t block_errors = 0;
  std::size_t iteration_sum = 0;
  double bler = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double mean_iterations = 0.0;

  void finalize() {
    bler = blocks ? static_cast<double>(block_errors) / static_cast<double>(blocks) : 0.0;
    std::tie(ci_low, ci_high) = wilson_interval(block_errors, blocks);
    mean_iterations = blocks ? static_cast<double>(iteration_sum) / static_cast<double>(blocks) : 0.0;
  }
};

// Everything that stays fixed across blocks and SNR points.
struct TurboSystem {
  CodingConfig config;
  Interleavers interleavers;
  FtnLink link;

  explicit TurboSystem(const CodingConfig& cfg)
      : config(cfg),
        interleavers(make_interleavers(cfg)),
        link(make_rrc(cfg.beta, cfg.W, cfg.c > 0.0 ? cfg.c : min_c(PulseFamily{PulseFamily::rrc, cfg.beta}, cfg.eps_W, cfg.W)), cfg.tau, cfg.omega, frame_symbols(cfg)) {}

  // Simulates one block; returns (block in error, outer iterations used).
  std::pair<bool, std::size_t> run_block(double rho, std::uint64_t seed) const {
    Rng rng(seed);
    Bits info(config.info_bits);
    for (auto& b : info) b = static_cast<std::uint8_t>(rng() >> 63);
    const Symbols x = encode_frame(info, config, interleavers);
    Symbols y = link.transmit(x, rho, rng);
    const double a = link.amplitude(rho);
    for (auto& v : y) v /= a;
    const DecodeResult d = three_stage_receive(y, link.taps(config.equalizer_memory), 1.0 / (a * a), config, interleavers);
    return {d.bits != info, d.outer_iterations};
  }

  // Blocks [begin, end) at one SNR, accumulated into `point`.
  void simulate(BlerPoint& point, std::size_t snr_index, std::size_t begin, std::size_t end, std::uint64_t seed,
                unsigned workers = 1) const {
    const double rho = db_to_linear(point.snr_db);
    std::vector<std::uint8_t> err(end - begin);
    std::vector<std::size_t> its(end - begin);
    parallel_for(end - begin, workers, [&](std::size_t i) {
      const auto r = run_block(rho, derive_seed(derive_seed(seed, snr_index), begin + i));
      err[i] = r.first;
      its[i] = r.second;
    });
    for (std::size_t i = 0; i < err.size(); ++i) {
      point.block_errors += err[i];
      point.iteration_sum += its[i];
    }
    point.blocks += end - begin;
    point.finalize();
  }
};

inline std::vector<BlerPoint> bler_sweep(const CodingConfig& cfg, const std::vector<double>& snr_list_db,
                                         std::size_t blocks, std::uint64_t seed, unsigned workers = 1) {
  const TurboSystem sys(cfg);
  std::vector<BlerPoint> out;
  for (std::size_t i = 0; i < snr_list_db.size(); ++i) {
    BlerPoint p;
    p.snr_db = snr_list_db[i];
    sys.simulate(p, i, 0, blocks, seed, workers);
    out.push_back(p);
  }
  return out;
}

}  // namespace ftn::turbo
