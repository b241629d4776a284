#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ftn/bounds.hpp"
#include "ftn/channel.hpp"
#include "ftn/design.hpp"
#include "ftn/experiments.hpp"
#include "ftn/pswf.hpp"
#include "ftn/pulse.hpp"
#include "ftn/turbo.hpp"

namespace ftn::selftest {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Fault hooks used to prove that checks can fail.
enum class Fault { none, eigenvalue, interleaver };

inline Fault parse_fault(const std::string& s) {
  if (s.empty() || s == "none") return Fault::none;
  if (s == "eigenvalue") return Fault::eigenvalue;
  if (s == "interleaver") return Fault::interleaver;
  throw Error(ErrorCode::invalid_argument, "unknown fault '" + s + "' (known: eigenvalue, interleaver)");
}

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Reference {
  Pulse pulse;
  double tau;
  std::size_t N;
};

inline const Reference& reference_link() {
  static const Reference ref = [] {
    const double c = min_c(PulseFamily{PulseFamily::rrc, 1.0}, 1e-4, 0.5);
    Pulse p = make_rrc(1.0, 0.5, c);
    const double tau = tau_star(132.0, c, max_dimensions(132.0, 1e-4).eta, 1.0);
    return Reference{p, tau, symbol_count(p, 132.0, tau, 0.5)};
  }();
  return ref;
}

inline std::string custom_csv(unsigned workers) {
  cli::ExperimentConfig cfg = cli::parse_config(R"({"experiment":"custom","omega":[20,30],"snr_db":[10],
      "tau":[0.6],"beta":[1.0],"methods":["na","mc","rcu"],"rcu_samples":100000})");
  cfg.workers = workers;
  const cli::Plan plan = cli::make_plan(cfg);
  std::map<std::size_t, cli::PointResult> done;
  cli::execute(plan, cfg, done);
  return cli::render_tables(plan, done).front();
}

}  // namespace detail

inline std::vector<Check> run(Fault fault = Fault::none) {
  std::vector<Check> out;
  auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c{name, false, "", 0.0};
    try {
      auto [ok, detail] = body();
      c.passed = ok;
      c.detail = detail;
    } catch (const std::exception& e) {
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(c));
  };

  check("gram trace: sum of eigenvalues equals N h_0", [&] {
    const auto& ref = detail::reference_link();
    const Eigen::MatrixXd H = build_gram(ref.pulse, ref.tau, ref.N);
    std::vector<double> lam = diagonalize(H, false).eigenvalues;
    if (fault == Fault::eigenvalue) lam[0] *= 1.01;
    double s = 0.0;
    for (double v : lam) s += v;
    const double err = std::abs(s - H.trace()) / H.trace();
    return std::pair{err <= 1e-10, "relative error " + detail::sci(err)};
  });

  check("pswf trace: sum of concentrations equals omega", [&] {
    const auto basis = cached_basis(20.0);
    double s = 0.0;
    for (double v : basis->eigenvalues) s += v;
    const double err = std::abs(s - 20.0) / 20.0;
    return std::pair{err <= 1e-8, "relative error " + detail::sci(err)};
  });

  check("eigen reconstruction U L U^T = H within 1e-8", [&] {
    const auto& ref = detail::reference_link();
    const Eigen::MatrixXd H = build_gram(ref.pulse, ref.tau, ref.N);
    const Eigensystem es = diagonalize(H, true);
    Eigen::VectorXd lam(static_cast<Eigen::Index>(es.eigenvalues.size()));
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = es.eigenvalues[static_cast<std::size_t>(i)];
    const double err = (es.eigvectors * lam.asDiagonal() * es.eigvectors.transpose() - H).cwiseAbs().maxCoeff();
    return std::pair{err <= 1e-8, "max entry error " + detail::sci(err)};
  });

  check("NA round trip na_bler(na_rate(Pe)) = Pe within 1e-12", [&] {
    const auto& ref = detail::reference_link();
    const ChannelModel ch = make_channel(ref.pulse, 132.0, 10.0, ref.tau, 0.5);
    double worst = 0.0;
    for (double pe : {1e-1, 1e-3, 1e-6})
      for (bool real : {false, true}) worst = std::max(worst, std::abs(na_bler(ch, na_rate(ch, pe, real), real) - pe));
    return std::pair{worst <= 1e-12, "max abs error " + detail::sci(worst)};
  });

  check("Q inverse round trip", [&] {
    double worst = 0.0;
    for (double p : {0.4, 1e-3, 1e-9, 1e-200}) worst = std::max(worst, std::abs(q_func(q_inv(p)) - p) / p);
    return std::pair{worst <= 1e-10, "max relative error " + detail::sci(worst)};
  });

  check("saddlepoint lower tail vs Monte Carlo (N=8)", [&] {
    const std::vector<double> s{0.5, 0.8, 1.0, 1.3, 1.7, 2.0, 2.5, 3.0};
    const std::vector<double> xi{0.2, 0.0, 1.0, 0.5, 0.3, 0.0, 2.0, 0.1};
    const ChiSquareSum y(s, xi);
    const double a = 0.45 * y.mean();
    const double sp = saddlepoint_log_cdf(s, xi, a).log_prob;
    Rng rng(derive_seed(12345, 0));
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    const std::size_t M = 1000000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < M; ++i) {
      double v = 0.0;
      for (std::size_t n = 0; n < s.size(); ++n) {
        const double re = std::sqrt(xi[n]) + g(rng), im = g(rng);
        v += (re * re + im * im) / s[n];
      }
      hits += v <= a;
    }
    const double mc = std::log(static_cast<double>(hits) / static_cast<double>(M));
    const double diff = std::abs(sp - mc);
    return std::pair{hits >= 1000 && diff <= 0.15,
                     "saddlepoint " + detail::sci(sp) + " vs MC " + detail::sci(mc) + " nats"};
  });

  auto s_check = [&](std::size_t l) {
    auto perm = turbo::s_random_interleaver(l, 7);
    if (fault == Fault::interleaver) std::swap(perm[0], perm[1]);
    const std::size_t S = turbo::s_random_spread(l);
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    bool bijective = true;
    for (std::size_t i = 0; i < l; ++i) bijective &= sorted[i] == i;
    const bool spread = turbo::has_s_property(perm, S);
    return std::pair{bijective && spread, "S=" + std::to_string(S) + (spread ? " holds" : " violated")};
  };
  check("interleaver S-property l=256", [&] { return s_check(256); });
  check("interleaver S-property l=512", [&] { return s_check(512); });

  check("tau* for the turbo link is 0.4859", [&] {
    const double t = detail::reference_link().tau;
    return std::pair{std::abs(t - 0.4859) <= 5e-4, "tau* = " + detail::sci(t)};
  });

  check("symbol counts 62 at tau=1 and 128 at tau*", [&] {
    const auto& ref = detail::reference_link();
    const std::size_t n1 = symbol_count(ref.pulse, 132.0, 1.0, 0.5);
    return std::pair{n1 == 62 && ref.N == 128, std::to_string(n1) + " and " + std::to_string(ref.N)};
  });

  check("equalizer on an ISI-free channel equals the QPSK demapper", [&] {
    Rng rng(3);
    std::normal_distribution<double> g;
    turbo::Symbols y(16);
    for (auto& v : y) v = {g(rng), g(rng)};
    turbo::LlrVector ap{std::vector<double>(32), turbo::LlrRole::apriori};
    for (auto& v : ap.values) v = g(rng);
    const auto eq = turbo::map_equalize(y, {1.0, 0.0, 0.0}, 0.8, ap);
    const auto dm = turbo::qpsk_demap(y, 0.8);
    double err = 0.0;
    for (std::size_t i = 0; i < 32; ++i) err = std::max(err, std::abs(eq[i] - dm[i]));
    return std::pair{err <= 1e-9, "max LLR error " + detail::sci(err)};
  });

  check("equalizer matches brute-force MAP (N=4, L=2)", [&] {
    Rng rng(5);
    std::normal_distribution<double> g;
    const std::vector<double> h{1.0, 0.45, -0.15};
    const std::size_t N = 4;
    const double nu = 0.6;
    turbo::Symbols y(N);
    for (auto& v : y) v = {g(rng), g(rng)};
    turbo::LlrVector ap{std::vector<double>(2 * N), turbo::LlrRole::apriori};
    for (auto& v : ap.values) v = g(rng);
    const auto eq = turbo::map_equalize(y, h, nu, ap);
    std::vector<double> l0(2 * N, -INFINITY), l1(2 * N, -INFINITY);
    for (std::size_t idx = 0; idx < 256; ++idx) {
      turbo::Symbols x(N);
      std::vector<int> d(N);
      for (std::size_t n = 0; n < N; ++n) x[n] = turbo::qpsk_point(d[n] = static_cast<int>((idx >> (2 * n)) & 3));
      double m = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        m += 2.0 * std::real(std::conj(x[n]) * y[n]) / nu;
        for (std::size_t k = 0; k < N; ++k) {
          const std::size_t lag = n > k ? n - k : k - n;
          if (lag < h.size()) m -= h[lag] * std::real(std::conj(x[n]) * x[k]) / nu;
        }
        m += ((d[n] & 1) ? -0.5 : 0.5) * ap[2 * n] + ((d[n] & 2) ? -0.5 : 0.5) * ap[2 * n + 1];
      }
      for (std::size_t n = 0; n < N; ++n)
        for (int b = 0; b < 2; ++b) {
          auto& t = ((d[n] >> b) & 1) ? l1[2 * n + b] : l0[2 * n + b];
          t = log_sum_exp(t, m);
        }
    }
    double err = 0.0;
    for (std::size_t i = 0; i < 2 * N; ++i) err = std::max(err, std::abs(l0[i] - l1[i] - ap[i] - eq[i]));
    return std::pair{err <= 1e-6, "max LLR error " + detail::sci(err)};
  });

  check("cosine-series autocorrelation closed form vs quadrature", [&] {
    const Pulse p = fs_table_pulse(fs_table().front());
    const double Tp = *p.Tp;
    double err = 0.0;
    for (int n = 0; n <= 3; ++n) {
      const double lag = n * p.T;
      if (lag >= Tp) break;
      const GaussLegendre gl = composite_gauss_legendre(lag - 0.5 * Tp, 0.5 * Tp, 64, 16);
      double q = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) q += gl.weights[i] * p(gl.nodes[i]) * p(gl.nodes[i] - lag);
      err = std::max(err, std::abs(q - fs_autocorrelation(p.fs_coeffs, Tp, lag)));
    }
    return std::pair{err <= 1e-6, "max error " + detail::sci(err)};
  });

  check("encoders are linear: complemented input, complemented codeword", [&] {
    Rng rng(9);
    turbo::Bits b(64), nb(64);
    for (std::size_t i = 0; i < 64; ++i) nb[i] = 1 - (b[i] = static_cast<std::uint8_t>(rng() >> 63));
    const turbo::Bits ones(64, 1);
    bool ok = true;
    for (const auto& code : {turbo::default_rsc, turbo::default_urc}) {
      const auto x = turbo::encode(code, b), y = turbo::encode(code, nb), z = turbo::encode(code, ones);
      for (std::size_t i = 0; i < x.size(); ++i) ok &= (x[i] ^ z[i]) == y[i];
    }
    return std::pair{ok, ok ? "superposition holds" : "superposition violated"};
  });

  check("determinism: identical CSV across runs and worker counts", [&] {
    const std::string a = detail::custom_csv(1), b = detail::custom_csv(1), c = detail::custom_csv(2);
    const bool same = a == b && a == c;
    return std::pair{same, same ? std::to_string(a.size()) + " bytes identical" : "outputs differ"};
  });

  return out;
}

}  // namespace ftn::selftest
