#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ftn/bounds.hpp"
#include "ftn/channel.hpp"
#include "ftn/error.hpp"
#include "ftn/pulse.hpp"
#include "ftn/random.hpp"

namespace ftn {

// Acceleration that packs N* = omega - eta symbols into the window.
inline double tau_star(double omega, double c, double eta, double beta) {
  require(omega > std::max(c, eta + 1.0), ErrorCode::invalid_argument, "need omega > max(c, eta + 1)");
  return (omega - c) / (omega - eta - 1.0) / (1.0 + beta);
}

// Same packing for any pulse with Nyquist period T: tau* = (omega - c) / ((omega - eta - 1) 2 W T).
inline double tau_star(const Pulse& p, double omega, double eta, double W) {
  const double c = p.time_limited() ? 2.0 * W * *p.Tp : 0.0;
  require(omega > std::max(c, eta + 1.0), ErrorCode::invalid_argument, "need omega > max(c, eta + 1)");
  return (omega - c) / (omega - eta - 1.0) / (2.0 * W * p.T);
}

inline double percent_gain(const Pulse& p, double omega, double rho, double Pe, double tau, double W) {
  require(tau > 0.0 && tau <= 1.0, ErrorCode::invalid_argument, "tau must lie in (0,1]");
  const double base = na_rate(make_channel(p, omega, rho, 1.0, W), Pe);
  if (tau == 1.0) return 0.0;
  const double accel = na_rate(make_channel(p, omega, rho, tau, W), Pe);
  return (accel - base) / base * 100.0;
}

// Minimal Nelder-Mead simplex search.
struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const std::vector<double>& step,
                                    std::size_t max_evals, double ftol = 1e-12) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  NelderMeadResult res;
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);
  res.evaluations = n + 1;
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  while (res.evaluations < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + ftol)) {
      double spread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j) spread = std::max(spread, std::abs(simplex[i][j] - simplex[best][j]));
      if (spread < 1e-10) break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) trial[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
    const double fr = f(trial);
    ++res.evaluations;
    if (fr < fv[best]) {
      for (std::size_t j = 0; j < n; ++j) trial2[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
      const double fe = f(trial2);
      ++res.evaluations;
      if (fe < fr) {
        simplex[worst] = trial2;
        fv[worst] = fe;
      } else {
        simplex[worst] = trial;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = trial;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      for (std::size_t j = 0; j < n; ++j)
        trial2[j] = outside ? centroid[j] + 0.5 * (trial[j] - centroid[j])
                            : centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
      const double fc = f(trial2);
      ++res.evaluations;
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = trial2;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
          fv[i] = f(simplex[i]);
          ++res.evaluations;
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[best];
  res.value = fv[best];
  return res;
}

struct FsDesignSpec {
  double omega = 20.0;
  double eps_W = 1e-4;
  double rho = 100.0;
  double K0 = 0.1;
  double W = 0.5;
  std::vector<double> c_grid;  // pulse TBPs 2 W Tp; empty selects 1, 1.5, ..., 20 below omega
};

inline std::vector<double> fs_c_grid(const FsDesignSpec& spec) {
  if (!spec.c_grid.empty()) return spec.c_grid;
  std::vector<double> g;
  for (int k = 2; k <= 40; ++k)
    if (0.5 * k < spec.omega) g.push_back(0.5 * k);
  return g;
}

inline std::size_t fs_harmonics(double W, double Tp) {
  return static_cast<std::size_t>(std::ceil(W * Tp - 1e-12)) + 2;
}

struct FsEvaluation {
  double c_na = 0.0;
  double oob = 1.0;
  double max_isi = 0.0;
  std::size_t N = 0;
};

// C_NA at tau = 1 plus the two constraint values for unit-energy coefficients.
inline FsEvaluation evaluate_fs_design(const std::vector<double>& coeffs, double Tp, double T,
                                       const FsDesignSpec& spec) {
  FsEvaluation e;
  const double Tx = spec.omega / (2.0 * spec.W);
  e.N = static_cast<std::size_t>(std::floor((Tx - Tp) / T + 1.0 + 1e-9));
  e.oob = fs_oob(coeffs, Tp, spec.W);
  std::vector<double> h(e.N, 0.0);
  for (std::size_t n = 0; n < e.N; ++n) h[n] = fs_autocorrelation(coeffs, Tp, static_cast<double>(n) * T);
  const auto lags = static_cast<std::size_t>(std::floor(Tp / T + 1e-12));
  for (std::size_t n = 1; n <= lags; ++n)
    e.max_isi = std::max(e.max_isi, std::abs(fs_autocorrelation(coeffs, Tp, static_cast<double>(n) * T)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(toeplitz(h), Eigen::EigenvaluesOnly);
  const double per = spec.rho * spec.omega / static_cast<double>(e.N);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    e.c_na += std::log2(1.0 + per * std::max(0.0, es.eigenvalues()(i)));
  e.c_na /= spec.omega;
  return e;
}

inline bool fs_feasible(const FsEvaluation& e, const FsDesignSpec& spec, double tol = 1e-6) {
  return e.oob <= spec.eps_W * (1.0 + tol) && e.max_isi <= spec.K0 * (1.0 + tol);
}

struct FsDesignOptions {
  std::size_t restarts = 20;
  std::uint64_t seed = 1;
  std::size_t max_evals = 6000;
  unsigned workers = 1;
};

struct FsDesignResult {
  std::vector<double> coeffs;  // unit energy, signed
  double Tp = 0.0;
  double T = 0.0;
  FsEvaluation eval;
};

// Best design at a fixed pulse TBP c.  The symbol count N jumps with T, so each band of
// T sharing one N is searched separately: a short screening pass ranks the bands and the
// full restart budget goes to the best few.
inline FsDesignResult optimize_fs_pulse_at(const FsDesignSpec& spec, double c, const FsDesignOptions& opt = {}) {
  require(spec.K0 > 0.0 && spec.eps_W > 0.0 && spec.rho > 0.0 && spec.W > 0.0, ErrorCode::invalid_argument,
          "invalid design spec");
  const double Tp = c / (2.0 * spec.W);
  const double span = spec.omega / (2.0 * spec.W) - Tp;
  require(span > 0.0, ErrorCode::pulse_exceeds_window, "pulse wider than the window");
  const std::size_t m = fs_harmonics(spec.W, Tp);
  const double T_lo = 0.5 / (2.0 * spec.W);
  const double T_hi = Tp * (1.0 - 1e-9);
  constexpr double penalty = 1e4;

  struct Band {
    std::size_t N;
    double lo, hi;
  };
  std::vector<Band> bands;
  const auto n_of = [&](double T) { return static_cast<std::size_t>(std::floor(span / T + 1.0 + 1e-9)); };
  for (std::size_t N = n_of(T_hi); N <= n_of(T_lo); ++N) {
    const double lo = std::max(T_lo, span / static_cast<double>(N) * (1.0 + 1e-9));
    const double hi = N == 1 ? T_hi : std::min(T_hi, span / static_cast<double>(N - 1));
    if (lo <= hi) bands.push_back({N, lo, hi});
  }

  auto decode = [&](const std::vector<double>& x, std::vector<double>& coeffs) {
    coeffs.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
    const double e = fs_energy(coeffs, Tp);
    if (!(e > 1e-300)) return false;
    for (auto& v : coeffs) v /= std::sqrt(e);
    return true;
  };
  auto objective = [&](const Band& b, const std::vector<double>& x) {
    const double T = x[m];
    double out = 0.0;
    if (T < b.lo) out += 1e6 * (1.0 + b.lo - T);
    if (T > b.hi) out += 1e6 * (1.0 + T - b.hi);
    if (out > 0.0) return out;
    std::vector<double> coeffs;
    if (!decode(x, coeffs)) return 1e9;
    const FsEvaluation e = evaluate_fs_design(coeffs, Tp, T, spec);
    if (e.N != b.N) return 1e6;
    return -e.c_na + penalty * (std::max(0.0, e.oob / spec.eps_W - 1.0) + std::max(0.0, e.max_isi / spec.K0 - 1.0));
  };
  auto start = [&](const Band& b, std::size_t r, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(m + 1, 0.0);
    if (r == 0) {
      x[0] = 1.0;
      if (m > 1) x[1] = 0.5;
      x[m] = 0.5 * (b.lo + b.hi);
    } else {
      x[0] = 0.2 + 0.8 * u(rng);
      for (std::size_t k = 1; k < m; ++k) x[k] = (1.2 * u(rng) - 0.6) / static_cast<double>(k);
      x[m] = b.lo + u(rng) * (b.hi - b.lo);
    }
    return x;
  };
  auto search = [&](const Band& b, std::vector<double> x, std::size_t evals, bool polish) {
    auto f = [&](const std::vector<double>& v) { return objective(b, v); };
    std::vector<double> step(m + 1, 0.1);
    step[m] = 0.25 * (b.hi - b.lo);
    NelderMeadResult best = nelder_mead(f, std::move(x), step, evals);
    for (int round = 0; polish && round < 3; ++round) {
      for (std::size_t j = 0; j < m; ++j) step[j] = 0.02 * (std::abs(best.x[j]) + 0.01);
      step[m] = 0.05 * (b.hi - b.lo);
      NelderMeadResult next = nelder_mead(f, best.x, step, evals / 2);
      const bool improved = next.value < best.value - 1e-12;
      if (next.value < best.value) best = std::move(next);
      if (!improved) break;
    }
    return best;
  };

  // Screening: a few short runs per band.
  const std::size_t screen_runs = std::max<std::size_t>(2, opt.restarts / 4);
  const std::size_t screen_evals = std::max<std::size_t>(200, opt.max_evals / 5);
  std::vector<double> screen(bands.size() * screen_runs);
  parallel_for(screen.size(), opt.workers, [&](std::size_t j) {
    const std::size_t bi = j / screen_runs, r = j % screen_runs;
    screen[j] = search(bands[bi], start(bands[bi], r, derive_seed(opt.seed, 1000003 * bi + r)), screen_evals, false).value;
  });
  std::vector<std::size_t> order(bands.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> band_best(bands.size(), std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < screen.size(); ++j) band_best[j / screen_runs] = std::min(band_best[j / screen_runs], screen[j]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return band_best[a] < band_best[b]; });
  order.resize(std::min<std::size_t>(order.size(), 3));

  // Full restarts on the leading bands.
  std::vector<std::pair<std::size_t, NelderMeadResult>> runs(order.size() * opt.restarts);
  parallel_for(runs.size(), opt.workers, [&](std::size_t j) {
    const std::size_t bi = order[j / opt.restarts], r = j % opt.restarts;
    runs[j] = {bi, search(bands[bi], start(bands[bi], r, derive_seed(opt.seed + 1, 1000003 * bi + r)), opt.max_evals, true)};
  });

  FsDesignResult out;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& [bi, run] : runs) {
    std::vector<double> coeffs;
    if (!decode(run.x, coeffs) || run.x[m] < bands[bi].lo || run.x[m] > bands[bi].hi) continue;
    const FsEvaluation e = evaluate_fs_design(coeffs, Tp, run.x[m], spec);
    if (!fs_feasible(e, spec)) continue;
    if (-e.c_na < best_value) {
      best_value = -e.c_na;
      out.coeffs = coeffs;
      out.Tp = Tp;
      out.T = run.x[m];
      out.eval = e;
    }
  }
  if (out.coeffs.empty()) throw Error(ErrorCode::infeasible, "no restart met the constraints");
  return out;
}

// Best design over the pulse-width grid.
inline FsDesignResult optimize_fs_pulse(const FsDesignSpec& spec, const FsDesignOptions& opt = {}) {
  FsDesignResult best;
  bool found = false;
  for (double c : fs_c_grid(spec)) {
    try {
      FsDesignResult r = optimize_fs_pulse_at(spec, c, opt);
      if (!found || r.eval.c_na > best.eval.c_na) {
        best = std::move(r);
        found = true;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::infeasible) throw;
    }
  }
  if (!found) throw Error(ErrorCode::infeasible, "no pulse width admits a feasible design");
  return best;
}

inline Pulse to_pulse(const FsDesignResult& r) { return make_fs_pulse(r.coeffs, r.Tp, r.T); }

// Published modified-Makarov rows (W = 0.5), all coefficients taken non-negative.
struct FsTableRow {
  double c;
  double T;
  std::vector<double> coeffs;
};

inline const std::vector<FsTableRow>& fs_table() {
  static const std::vector<FsTableRow> rows{
      {4.0, 2.2692, {0.4106, 0.2017, 0.0063, 0.0002}},
      {6.0, 1.6923, {0.1931, 0.2202, 0.1271, 0.0079, 0.0004}},
      {10.0, 1.2154, {0.1068, 0.1136, 0.0934, 0.1245, 0.0846, 0.0047, 0.0005}},
  };
  return rows;
}

// Table row as a pulse, renormalized to unit energy; `W` rescales time.
inline Pulse fs_table_pulse(const FsTableRow& row, double W = 0.5) {
  const double Tp = row.c / (2.0 * W);
  const double scale = 0.5 / W;
  std::vector<double> c = row.coeffs;
  for (auto& v : c) v /= std::sqrt(scale);
  return make_fs_pulse(normalize_fs_coeffs(std::move(c), Tp), Tp, row.T * scale);
}

}  // namespace ftn
