#pragma once

#include <boost/version.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ftn/bounds.hpp"
#include "ftn/channel.hpp"
#include "ftn/design.hpp"
#include "ftn/error.hpp"
#include "ftn/pswf.hpp"
#include "ftn/pulse.hpp"
#include "ftn/random.hpp"
#include "ftn/turbo.hpp"

namespace ftn::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "1.0.0";
inline constexpr double bandwidth = 0.5;  // W in Hz; every experiment runs at W = 0.5

// ---------------------------------------------------------------------------
// Formatting

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string num(std::size_t v) { return std::to_string(v); }

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out + '\n';
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Configuration schema

enum class Kind { number_list, number, count, flag, text, text_list };

struct Field {
  const char* key;
  Kind kind;
  double lo;
  double hi;
  bool lo_open;
  bool hi_open;
  const char* help;
};

inline const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      {"omega", Kind::number_list, 0.0, 1e4, true, false, "time-bandwidth products"},
      {"snr_db", Kind::number_list, -50.0, 100.0, false, false, "SNR rho in dB"},
      {"tau", Kind::number_list, 0.0, 1.0, true, false, "acceleration factors"},
      {"beta", Kind::number_list, 0.0, 1.0, false, false, "RRC roll-off factors"},
      {"eps_w", Kind::number_list, 0.0, 1.0, true, true, "OOB energy constraints"},
      {"pe", Kind::number_list, 0.0, 1.0, true, true, "target block error rates"},
      {"c", Kind::number_list, 1.0, 200.0, false, false, "pulse time-bandwidth products 2 W Tp"},
      {"pulses", Kind::text_list, 0, 0, false, false, "pulse families"},
      {"methods", Kind::text_list, 0, 0, false, false, "curves to compute"},
      {"rcu_samples", Kind::count, 1e5, 1e10, false, false, "Monte Carlo draws for RCU"},
      {"blocks", Kind::count, 1.0, 1e9, false, false, "simulated blocks per SNR point"},
      {"chunk_blocks", Kind::count, 1.0, 1e9, false, false, "blocks between progress records"},
      {"info_bits", Kind::count, 4.0, 1e5, false, false, "information bits per block"},
      {"equalizer_memory", Kind::count, 0.0, 8.0, false, false, "equalizer taps L"},
      {"inner_iterations", Kind::count, 1.0, 1e3, false, false, "equalizer-URC iterations"},
      {"outer_iterations", Kind::count, 1.0, 100.0, false, false, "URC-RSC iterations"},
      {"early_stop", Kind::flag, 0, 0, false, false, "stop when decisions settle"},
      {"k0", Kind::number, 0.0, 1e3, true, false, "autocorrelation bound K0"},
      {"restarts", Kind::count, 1.0, 1e4, false, false, "optimizer restarts"},
      {"max_evals", Kind::count, 100.0, 1e8, false, false, "simplex evaluations per restart"},
  };
  return f;
}

struct ExperimentInfo {
  const char* id;
  const char* summary;
  std::vector<std::string> columns;  // main CSV
  std::vector<std::string> keys;     // accepted parameter keys
  const char* defaults;              // JSON object
};

inline const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list{
      {"fig2", "Rate bounds versus TBP with the RRC roll-off schedule and PSWF benchmarks",
       {"snr_db", "omega", "beta", "c", "tau", "N", "method", "rate"},
       {"omega", "snr_db", "pe", "eps_w", "beta", "methods", "rcu_samples"},
       R"({"omega":[10,20,30,40,50,75,100,132,150,200,250,300,400,500],"snr_db":[10,30],"pe":[1e-3],
           "eps_w":[1e-4],"methods":["na","mc","rcu","nyquist","pswf_uniform","pswf_waterfill"],
           "rcu_samples":100000})"},
      {"fig3", "Percentage NA gain over Nyquist signaling versus tau",
       {"omega", "beta", "c", "tau", "tau0", "tau_star", "N", "rate_na", "gain_pct"},
       {"omega", "beta", "tau", "snr_db", "pe", "eps_w"},
       R"({"omega":[50,100,300],"beta":[0.1,0.5,1.0],"snr_db":[30],"pe":[1e-3],"eps_w":[1e-4],
           "tau":[1.0,0.95,0.9,0.85,0.8,0.75,0.7,0.65,0.6,0.55,0.5,0.45,0.4,0.35,0.3,0.25,0.2]})"},
      {"fig4-oob", "OOB energy versus pulse TBP c, plus minimum-c crossings (<stem>_minc.csv)",
       {"pulse", "beta", "c", "oob"},
       {"pulses", "beta", "c", "eps_w"},
       R"({"pulses":["rrc","gaussian","pswf"],"beta":[0.05,0.1,0.2,0.3,0.5,1.0],"eps_w":[1e-2,1e-3,1e-4,1e-5]})"},
      {"fig5-snr", "Normalized parallel-channel SNRs for tau0, tau* and extra tau values",
       {"omega", "beta", "tau_label", "tau", "N", "n", "snr_norm"},
       {"omega", "beta", "eps_w", "tau"},
       R"({"omega":[20,50,100],"beta":[0.5],"eps_w":[1e-4],"tau":[]})"},
      {"fig6-pulses", "NA rate versus TBP for several pulse families and PSWF benchmarks",
       {"pulse", "beta", "c", "omega", "tau", "N", "rate_na"},
       {"omega", "snr_db", "pe", "eps_w", "pulses", "beta"},
       R"({"omega":[5,10,15,20,30,50,75,100,150,200,300,500],"snr_db":[30],"pe":[1e-3],"eps_w":[1e-4],
           "pulses":["fs","rrc","pswf","gaussian","pswf_uniform","pswf_waterfill"],"beta":[0.1,0.3,0.5,1.0]})"},
      {"table1-opt", "Optimized cosine-series pulses (layout c, T, c_0, c_k)",
       {"omega", "c", "Tp", "T", "c_na", "oob", "max_isi", "table_c_na", "c_0", "c_k..."},
       {"omega", "c", "snr_db", "eps_w", "k0", "restarts", "max_evals"},
       R"({"omega":[20],"c":[4,6],"snr_db":[20],"eps_w":[1e-4],"k0":0.1,"restarts":20,"max_evals":6000})"},
      {"fig7-bler", "Three-stage turbo BLER versus SNR with NA, MC and RCU minimum BLER",
       {"snr_db", "method", "blocks", "block_errors", "bler", "ci_low", "ci_high", "mean_iterations"},
       {"snr_db", "blocks", "chunk_blocks", "omega", "beta", "eps_w", "tau", "info_bits", "equalizer_memory",
        "inner_iterations", "outer_iterations", "early_stop", "methods", "rcu_samples"},
       R"({"snr_db":[2.0,2.5,3.0,3.5,4.0,4.5],"blocks":20000,"chunk_blocks":500,"omega":[132],"beta":[1.0],
           "eps_w":[1e-4],"tau":[],"info_bits":128,"equalizer_memory":3,"inner_iterations":5,
           "outer_iterations":30,"early_stop":false,"methods":["turbo","na","mc","rcu"],"rcu_samples":100000})"},
      {"custom", "Cartesian sweep of capacity and rate bounds for truncated RRC pulses",
       {"omega", "snr_db", "tau", "beta", "eps_w", "pe", "c", "N", "method", "value"},
       {"omega", "snr_db", "tau", "beta", "eps_w", "pe", "methods", "rcu_samples"},
       R"({"omega":[132],"snr_db":[10],"tau":[1.0],"beta":[1.0],"eps_w":[1e-4],"pe":[1e-3],
           "methods":["capacity","na","mc"],"rcu_samples":100000})"},
  };
  return list;
}

inline const ExperimentInfo* find_experiment(const std::string& id) {
  for (const auto& e : experiments())
    if (id == e.id) return &e;
  return nullptr;
}

inline const std::map<std::string, std::set<std::string>>& allowed_names() {
  static const std::map<std::string, std::set<std::string>> m{
      {"fig2/methods", {"na", "mc", "rcu", "nyquist", "pswf_uniform", "pswf_waterfill"}},
      {"fig4-oob/pulses", {"rrc", "gaussian", "pswf"}},
      {"fig6-pulses/pulses", {"fs", "rrc", "pswf", "gaussian", "pswf_uniform", "pswf_waterfill"}},
      {"fig7-bler/methods", {"turbo", "na", "mc", "rcu"}},
      {"custom/methods", {"capacity", "na", "mc", "rcu"}},
  };
  return m;
}

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output;  // file stem; defaults to the experiment id
  json params;         // validated parameters, defaults filled, lists normalized
};

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline std::string where(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? "" : "line " + std::to_string(line_of(text, pos)) + ": ";
}

[[noreturn]] inline void config_fail(const std::string& text, const std::string& key, const std::string& msg) {
  throw Error(ErrorCode::config_invalid, where(text, key) + "field '" + key + "': " + msg);
}

inline std::string range_text(const Field& f) {
  return std::string(f.lo_open ? "(" : "[") + num(f.lo) + ", " + num(f.hi) + (f.hi_open ? ")" : "]");
}

inline void check_range(const std::string& text, const Field& f, double v) {
  const bool ok = std::isfinite(v) && (f.lo_open ? v > f.lo : v >= f.lo) && (f.hi_open ? v < f.hi : v <= f.hi);
  if (!ok) config_fail(text, f.key, "value " + num(v) + " outside " + range_text(f));
}

inline json normalize(const std::string& text, const std::string& exp, const Field& f, const json& v) {
  switch (f.kind) {
    case Kind::number_list: {
      const json arr = v.is_array() ? v : json::array({v});
      for (const auto& x : arr) {
        if (!x.is_number()) config_fail(text, f.key, "expected a number or a list of numbers");
        check_range(text, f, x.get<double>());
      }
      return arr;
    }
    case Kind::number:
      if (!v.is_number()) config_fail(text, f.key, "expected a number");
      check_range(text, f, v.get<double>());
      return v;
    case Kind::count:
      if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()))
        config_fail(text, f.key, "expected an integer");
      check_range(text, f, v.get<double>());
      return json(static_cast<std::uint64_t>(v.get<double>()));
    case Kind::flag:
      if (!v.is_boolean()) config_fail(text, f.key, "expected true or false");
      return v;
    case Kind::text:
      if (!v.is_string()) config_fail(text, f.key, "expected a string");
      return v;
    case Kind::text_list: {
      const json arr = v.is_array() ? v : json::array({v});
      const auto it = allowed_names().find(exp + "/" + f.key);
      for (const auto& x : arr) {
        if (!x.is_string()) config_fail(text, f.key, "expected a list of strings");
        if (it != allowed_names().end() && !it->second.count(x.get<std::string>())) {
          std::string known;
          for (const auto& k : it->second) known += (known.empty() ? "" : ", ") + k;
          config_fail(text, f.key, "unknown entry '" + x.get<std::string>() + "' (known: " + known + ")");
        }
      }
      return arr;
    }
  }
  return v;
}

inline const Field& field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw Error(ErrorCode::config_invalid, "internal: no field " + key);
}

}  // namespace detail

// Validates every field before anything is computed; throws config_invalid with a line hint.
inline ExperimentConfig parse_config(const std::string& text) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config_invalid,
                "line " + std::to_string(detail::line_of(text, e.byte ? e.byte - 1 : 0)) + ": malformed JSON: " + e.what());
  }
  if (!raw.is_object()) throw Error(ErrorCode::config_invalid, "line 1: config must be a JSON object");
  if (!raw.contains("experiment") || !raw["experiment"].is_string())
    throw Error(ErrorCode::config_invalid, "field 'experiment': required string");
  ExperimentConfig cfg;
  cfg.experiment = raw["experiment"].get<std::string>();
  const ExperimentInfo* info = find_experiment(cfg.experiment);
  if (!info) detail::config_fail(text, "experiment", "unknown experiment '" + cfg.experiment + "'");
  cfg.params = json::parse(info->defaults);

  for (auto it = raw.begin(); it != raw.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "experiment") continue;
    if (key == "seed") {
      if (!v.is_number_unsigned()) detail::config_fail(text, key, "expected a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "workers") {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 1024)
        detail::config_fail(text, key, "expected an integer in [0, 1024] (0 = all cores)");
      cfg.workers = static_cast<unsigned>(v.get<std::uint64_t>());
    } else if (key == "output") {
      if (!v.is_string() || v.get<std::string>().empty() ||
          v.get<std::string>().find_first_of("/\\") != std::string::npos)
        detail::config_fail(text, key, "expected a plain file stem");
      cfg.output = v.get<std::string>();
    } else if (std::find(info->keys.begin(), info->keys.end(), key) != info->keys.end()) {
      cfg.params[key] = detail::normalize(text, cfg.experiment, detail::field(key), v);
    } else {
      detail::config_fail(text, key, "unknown key for experiment '" + cfg.experiment + "'");
    }
  }
  for (const auto& key : info->keys) {
    const auto& f = detail::field(key);
    if (f.kind == Kind::number_list && cfg.params.contains(key) && cfg.params[key].empty() && key != "tau" &&
        key != "beta")
      detail::config_fail(text, key, "list must not be empty");
  }
  if (cfg.experiment == "fig7-bler") {
    for (const char* key : {"omega", "beta", "eps_w"})
      if (cfg.params[key].size() != 1) detail::config_fail(text, key, "fig7-bler takes a single value");
    if (cfg.params["tau"].size() > 1) detail::config_fail(text, "tau", "fig7-bler takes at most one value");
  }
  if (cfg.experiment == "fig5-snr" && cfg.params["beta"].empty())
    detail::config_fail(text, "beta", "list must not be empty");
  if ((cfg.experiment == "fig3" || cfg.experiment == "custom") && cfg.params["beta"].empty())
    detail::config_fail(text, "beta", "list must not be empty");
  if (cfg.experiment == "custom" && cfg.params["tau"].empty()) detail::config_fail(text, "tau", "list must not be empty");
  if (cfg.output.empty()) cfg.output = cfg.experiment;
  return cfg;
}

inline json config_echo(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["output"] = cfg.output;
  for (auto it = cfg.params.begin(); it != cfg.params.end(); ++it) j[it.key()] = it.value();
  return j;
}

// ---------------------------------------------------------------------------
// Plans

struct Table {
  std::string suffix;  // empty for the main CSV
  std::vector<std::string> header;
};

struct Row {
  std::size_t table = 0;
  std::vector<std::string> cells;
};

struct PointResult {
  std::vector<Row> rows;
  json diagnostics = json::object();
};

struct PointContext {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  const json* resume = nullptr;              // partial state recorded by an earlier run
  std::function<void(const json&)> record;  // stores partial state for the next checkpoint
};

struct Plan {
  std::vector<Table> tables;
  std::vector<json> points;
  std::function<PointResult(const json&, PointContext&)> eval;
  bool parallel_points = true;
};

namespace detail {

inline std::vector<double> list(const json& params, const char* key) {
  std::vector<double> v;
  for (const auto& x : params.at(key)) v.push_back(x.get<double>());
  return v;
}

inline std::vector<std::string> names(const json& params, const char* key) {
  std::vector<std::string> v;
  for (const auto& x : params.at(key)) v.push_back(x.get<std::string>());
  return v;
}

inline bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

inline double fig2_beta(double omega) { return omega <= 50.0 ? 1.0 : omega <= 200.0 ? 0.3 : 0.1; }

// Thread-safe memo for the smallest pulse TBP of an RRC roll-off at a given eps_W.
inline double rrc_min_c(double beta, double eps_W) {
  static std::mutex m;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard lock(m);
    const auto it = cache.find({beta, eps_W});
    if (it != cache.end()) return it->second;
  }
  const double c = min_c(PulseFamily{PulseFamily::rrc, beta}, eps_W, bandwidth);
  std::lock_guard lock(m);
  cache[{beta, eps_W}] = c;
  return c;
}

inline double eta_at(double omega, double eps_W) { return max_dimensions(omega, eps_W).eta; }

// Largest Pe bracketed rate-inverse: Pe such that rate(Pe) = R, rate increasing in Pe.
inline double invert_rate(const std::function<double(double)>& rate, double R) {
  double lo = -30.0, hi = std::log10(0.4999);
  if (rate(std::pow(10.0, hi)) < R) return 1.0;
  if (rate(std::pow(10.0, lo)) > R) return std::pow(10.0, lo);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate(std::pow(10.0, mid)) < R ? lo : hi) = mid;
  }
  return std::pow(10.0, 0.5 * (lo + hi));
}

inline Plan plan_fig2(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  plan.tables = {{"", find_experiment("fig2")->columns}};
  for (double snr : list(P, "snr_db"))
    for (double pe : list(P, "pe"))
      for (double eps : list(P, "eps_w"))
        for (double omega : list(P, "omega")) {
          const bool scheduled = !P.contains("beta") || P["beta"].empty();
          const std::vector<double> betas = scheduled ? std::vector<double>{fig2_beta(omega)} : list(P, "beta");
          for (double beta : betas)
            plan.points.push_back({{"snr_db", snr}, {"pe", pe}, {"eps_w", eps}, {"omega", omega}, {"beta", beta}});
        }
  const auto methods = names(P, "methods");
  const std::size_t samples = P["rcu_samples"].get<std::size_t>();
  plan.eval = [methods, samples](const json& pt, PointContext& ctx) {
    const double snr = pt["snr_db"], pe = pt["pe"], eps = pt["eps_w"], omega = pt["omega"], beta = pt["beta"];
    const double rho = db_to_linear(snr);
    PointResult r;
    auto row = [&](const std::string& c, const std::string& tau, const std::string& N, const char* method, double v) {
      r.rows.push_back({0, {num(snr), num(omega), num(beta), c, tau, N, method, num(v)}});
    };
    const double c = rrc_min_c(beta, eps);
    const double eta = eta_at(omega, eps);
    r.diagnostics["c"] = c;
    r.diagnostics["eta"] = eta;
    const bool ftn_ok = omega > std::max(c, eta + 1.0);
    if (ftn_ok) {
      const Pulse p = make_rrc(beta, bandwidth, c);
      const double tau = std::min(1.0, tau_star(omega, c, eta, beta));
      const ChannelModel ch = make_channel(p, omega, rho, tau, bandwidth);
      r.diagnostics["tau_star"] = tau;
      r.diagnostics["N"] = ch.N;
      if (has(methods, "na")) row(num(c), num(tau), num(ch.N), "na", na_rate(ch, pe));
      if (has(methods, "mc")) {
        const BoundResult b = mc_rate(ch, pe);
        r.diagnostics["mc_t_hat"] = b.diagnostics.t_hat.value_or(NAN);
        row(num(c), num(tau), num(ch.N), "mc", *b.rate_bps_hz);
      }
      if (has(methods, "rcu")) {
        const BoundResult b = rcu_rate(ch, pe, samples, ctx.seed, ctx.workers);
        r.diagnostics["rcu_std_error"] = b.diagnostics.std_error.value_or(NAN);
        row(num(c), num(tau), num(ch.N), "rcu", *b.rate_bps_hz);
      }
    } else {
      r.diagnostics["skipped_ftn"] = "omega <= max(c, eta + 1)";
    }
    if (has(methods, "nyquist") && omega > c) {
      const ChannelModel ch = make_channel(make_rrc(beta, bandwidth, c), omega, rho, 1.0, bandwidth);
      row(num(c), "1", num(ch.N), "nyquist", na_rate(ch, pe));
    }
    if (has(methods, "pswf_uniform")) row("", "", "", "pswf_uniform", uniform_benchmark(omega, eps, rho, pe));
    if (has(methods, "pswf_waterfill")) row("", "", "", "pswf_waterfill", waterfill_benchmark(omega, eps, rho, pe));
    return r;
  };
  return plan;
}

inline Plan plan_fig3(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  plan.tables = {{"", find_experiment("fig3")->columns}};
  for (double snr : list(P, "snr_db"))
    for (double pe : list(P, "pe"))
      for (double eps : list(P, "eps_w"))
        for (double omega : list(P, "omega"))
          for (double beta : list(P, "beta"))
            plan.points.push_back({{"snr_db", snr}, {"pe", pe}, {"eps_w", eps}, {"omega", omega}, {"beta", beta}});
  const auto taus = list(P, "tau");
  const bool multi = P["snr_db"].size() > 1 || P["pe"].size() > 1 || P["eps_w"].size() > 1;
  if (multi) plan.tables[0].header.insert(plan.tables[0].header.begin(), {"snr_db", "pe", "eps_w"});
  plan.eval = [taus, multi](const json& pt, PointContext&) {
    const double snr = pt["snr_db"], pe = pt["pe"], eps = pt["eps_w"], omega = pt["omega"], beta = pt["beta"];
    const double rho = db_to_linear(snr);
    const double c = rrc_min_c(beta, eps);
    require(omega > c, ErrorCode::pulse_exceeds_window, "omega must exceed the pulse TBP");
    const Pulse p = make_rrc(beta, bandwidth, c);
    const double eta = eta_at(omega, eps);
    const double ts = omega > eta + 1.0 ? tau_star(omega, c, eta, beta) : NAN;
    const double base = na_rate(make_channel(p, omega, rho, 1.0, bandwidth), pe);
    PointResult r;
    r.diagnostics = {{"c", c}, {"eta", eta}, {"tau_star", ts}, {"rate_nyquist", base}};
    for (double tau : taus) {
      const ChannelModel ch = make_channel(p, omega, rho, tau, bandwidth);
      const double rate = na_rate(ch, pe);
      std::vector<std::string> cells{num(omega), num(beta), num(c), num(tau), num(1.0 / (1.0 + beta)), num(ts),
                                     num(ch.N), num(rate), num(tau == 1.0 ? 0.0 : (rate - base) / base * 100.0)};
      if (multi) cells.insert(cells.begin(), {num(snr), num(pe), num(eps)});
      r.rows.push_back({0, std::move(cells)});
    }
    return r;
  };
  return plan;
}

inline std::vector<double> default_c_grid() {
  std::vector<double> c;
  for (int k = 4; k <= 160; ++k) c.push_back(0.25 * k);
  return c;
}

inline Plan plan_fig4(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  plan.tables = {{"", find_experiment("fig4-oob")->columns}, {"minc", {"pulse", "beta", "eps_w", "min_c"}}};
  const auto pulses = names(P, "pulses");
  const auto betas = list(P, "beta");
  const auto eps_list = list(P, "eps_w");
  const std::vector<double> cs = P.contains("c") ? list(P, "c") : default_c_grid();
  for (const auto& pulse : pulses) {
    const std::vector<double> bs = pulse == "rrc" ? betas : std::vector<double>{0.0};
    for (double b : bs) {
      plan.points.push_back({{"kind", "oob"}, {"pulse", pulse}, {"beta", b}});
      for (double eps : eps_list) plan.points.push_back({{"kind", "min_c"}, {"pulse", pulse}, {"beta", b}, {"eps_w", eps}});
    }
  }
  // The Gaussian width follows the tightest listed constraint.
  const double gauss_eps = *std::min_element(eps_list.begin(), eps_list.end());
  plan.eval = [cs, gauss_eps](const json& pt, PointContext&) {
    const std::string pulse = pt["pulse"];
    const double beta = pt["beta"];
    const PulseFamily fam{pulse == "rrc" ? PulseFamily::rrc : pulse == "gaussian" ? PulseFamily::gaussian
                                                                                   : PulseFamily::pswf_principal,
                          beta};
    PointResult r;
    const std::string bcell = pulse == "rrc" ? num(beta) : "";
    if (pt["kind"] == "oob") {
      for (double c : cs) {
        const double Tp = c / (2.0 * bandwidth);
        const Pulse p = pulse == "gaussian" ? make_gaussian_truncated(gauss_eps, bandwidth, Tp)
                                            : make_family_pulse(fam, c, gauss_eps, bandwidth);
        r.rows.push_back({0, {pulse, bcell, num(c), num(oob_energy(p, bandwidth))}});
      }
      if (pulse == "gaussian") r.diagnostics["gaussian_eps_w"] = gauss_eps;
    } else {
      const double eps = pt["eps_w"];
      r.rows.push_back({1, {pulse, bcell, num(eps), num(min_c(fam, eps, bandwidth))}});
    }
    return r;
  };
  return plan;
}

inline Plan plan_fig5(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  plan.tables = {{"", find_experiment("fig5-snr")->columns}};
  for (double eps : list(P, "eps_w"))
    for (double omega : list(P, "omega"))
      for (double beta : list(P, "beta")) {
        plan.points.push_back({{"eps_w", eps}, {"omega", omega}, {"beta", beta}, {"label", "tau0"}});
        plan.points.push_back({{"eps_w", eps}, {"omega", omega}, {"beta", beta}, {"label", "tau_star"}});
        for (double t : list(P, "tau"))
          plan.points.push_back({{"eps_w", eps}, {"omega", omega}, {"beta", beta}, {"label", "tau"}, {"tau", t}});
      }
  if (P["eps_w"].size() > 1) plan.tables[0].header.insert(plan.tables[0].header.begin(), "eps_w");
  const bool multi = P["eps_w"].size() > 1;
  plan.eval = [multi](const json& pt, PointContext&) {
    const double eps = pt["eps_w"], omega = pt["omega"], beta = pt["beta"];
    const std::string label = pt["label"];
    const double c = rrc_min_c(beta, eps);
    require(omega > c, ErrorCode::pulse_exceeds_window, "omega must exceed the pulse TBP");
    double tau;
    PointResult r;
    if (label == "tau0") {
      tau = 1.0 / (1.0 + beta);
    } else if (label == "tau_star") {
      const double eta = eta_at(omega, eps);
      tau = tau_star(omega, c, eta, beta);
      r.diagnostics["eta"] = eta;
    } else {
      tau = pt["tau"];
    }
    const ChannelModel ch = make_channel(make_rrc(beta, bandwidth, c), omega, 1.0, tau, bandwidth);
    r.diagnostics["N"] = ch.N;
    r.diagnostics["c"] = c;
    for (std::size_t n = 0; n < ch.N; ++n) {
      std::vector<std::string> cells{num(omega), num(beta), label, num(tau), num(ch.N), num(n), num(1.0 / ch.noise_vars[n])};
      if (multi) cells.insert(cells.begin(), num(eps));
      r.rows.push_back({0, std::move(cells)});
    }
    return r;
  };
  return plan;
}

inline Plan plan_fig6(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  plan.tables = {{"", find_experiment("fig6-pulses")->columns}};
  const auto pulses = names(P, "pulses");
  const auto betas = list(P, "beta");
  const bool multi = P["snr_db"].size() > 1 || P["pe"].size() > 1 || P["eps_w"].size() > 1;
  if (multi) plan.tables[0].header.insert(plan.tables[0].header.begin(), {"snr_db", "pe", "eps_w"});
  for (double snr : list(P, "snr_db"))
    for (double pe : list(P, "pe"))
      for (double eps : list(P, "eps_w"))
        for (const auto& pulse : pulses) {
          std::vector<double> variants{0.0};
          if (pulse == "rrc") variants = betas;
          if (pulse == "fs") {
            variants.clear();
            for (const auto& row : fs_table()) variants.push_back(row.c);
          }
          for (double v : variants)
            for (double omega : list(P, "omega"))
              plan.points.push_back(
                  {{"snr_db", snr}, {"pe", pe}, {"eps_w", eps}, {"pulse", pulse}, {"variant", v}, {"omega", omega}});
        }
  plan.eval = [multi](const json& pt, PointContext&) {
    const double snr = pt["snr_db"], pe = pt["pe"], eps = pt["eps_w"], omega = pt["omega"], v = pt["variant"];
    const std::string pulse = pt["pulse"];
    const double rho = db_to_linear(snr);
    PointResult r;
    auto emit = [&](const std::string& beta, const std::string& c, const std::string& tau, const std::string& N,
                    double rate) {
      std::vector<std::string> cells{pulse, beta, c, num(omega), tau, N, num(rate)};
      if (multi) cells.insert(cells.begin(), {num(snr), num(pe), num(eps)});
      r.rows.push_back({0, std::move(cells)});
    };
    if (pulse == "pswf_uniform") {
      emit("", "", "", "", uniform_benchmark(omega, eps, rho, pe));
      return r;
    }
    if (pulse == "pswf_waterfill") {
      emit("", "", "", "", waterfill_benchmark(omega, eps, rho, pe));
      return r;
    }
    std::optional<Pulse> p;
    double c;
    if (pulse == "fs") {
      const auto& rows = fs_table();
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const FsTableRow& row) { return row.c == v; });
      p = fs_table_pulse(*it, bandwidth);
      c = v;
      r.diagnostics["oob"] = oob_energy(*p, bandwidth);
    } else if (pulse == "rrc") {
      c = rrc_min_c(v, eps);
      p = make_rrc(v, bandwidth, c);
    } else {
      const PulseFamily fam{pulse == "gaussian" ? PulseFamily::gaussian : PulseFamily::pswf_principal, 0.0};
      c = min_c(fam, eps, bandwidth);
      p = make_family_pulse(fam, c, eps, bandwidth);
    }
    const double eta = eta_at(omega, eps);
    r.diagnostics["c"] = c;
    r.diagnostics["eta"] = eta;
    if (!(omega > std::max(c, eta + 1.0))) {
      r.diagnostics["skipped"] = "omega <= max(c, eta + 1)";
      return r;
    }
    const double tau = std::min(1.0, tau_star(*p, omega, eta, bandwidth));
    const ChannelModel ch = make_channel(*p, omega, rho, tau, bandwidth);
    emit(pulse == "rrc" ? num(v) : "", num(c), num(tau), num(ch.N), na_rate(ch, pe));
    return r;
  };
  return plan;
}

inline Plan plan_table1(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  std::size_t m = 0;
  for (double c : list(P, "c")) m = std::max(m, fs_harmonics(bandwidth, c / (2.0 * bandwidth)));
  std::vector<std::string> header{"omega", "c", "Tp", "T", "c_na", "oob", "max_isi", "table_c_na"};
  for (std::size_t k = 0; k < m; ++k) header.push_back("c_" + std::to_string(k));
  plan.tables = {{"", header}};
  for (double snr : list(P, "snr_db"))
    for (double eps : list(P, "eps_w"))
      for (double omega : list(P, "omega"))
        for (double c : list(P, "c")) plan.points.push_back({{"snr_db", snr}, {"eps_w", eps}, {"omega", omega}, {"c", c}});
  if (P["snr_db"].size() > 1 || P["eps_w"].size() > 1)
    plan.tables[0].header.insert(plan.tables[0].header.begin(), {"snr_db", "eps_w"});
  const bool multi = P["snr_db"].size() > 1 || P["eps_w"].size() > 1;
  const double k0 = P["k0"];
  const std::size_t restarts = P["restarts"], max_evals = P["max_evals"];
  plan.parallel_points = false;
  plan.eval = [m, k0, restarts, max_evals, multi](const json& pt, PointContext& ctx) {
    const double snr = pt["snr_db"], eps = pt["eps_w"], omega = pt["omega"], c = pt["c"];
    FsDesignSpec spec;
    spec.omega = omega;
    spec.eps_W = eps;
    spec.rho = db_to_linear(snr);
    spec.K0 = k0;
    spec.W = bandwidth;
    FsDesignOptions opt;
    opt.restarts = restarts;
    opt.max_evals = max_evals;
    opt.seed = ctx.seed;
    opt.workers = ctx.workers;
    const FsDesignResult res = optimize_fs_pulse_at(spec, c, opt);
    std::string table_cna;
    for (const auto& row : fs_table())
      if (row.c == c) {
        const Pulse tp = fs_table_pulse(row, bandwidth);
        table_cna = num(evaluate_fs_design(tp.fs_coeffs, c / (2.0 * bandwidth), tp.T, spec).c_na);
      }
    std::vector<std::string> cells{num(omega), num(c),           num(res.Tp),           num(res.T),
                                   num(res.eval.c_na), num(res.eval.oob), num(res.eval.max_isi), table_cna};
    for (std::size_t k = 0; k < m; ++k) cells.push_back(k < res.coeffs.size() ? num(res.coeffs[k]) : "");
    if (multi) cells.insert(cells.begin(), {num(snr), num(eps)});
    PointResult r;
    r.rows.push_back({0, std::move(cells)});
    r.diagnostics["N"] = res.eval.N;
    return r;
  };
  return plan;
}

inline turbo::CodingConfig fig7_coding(const json& P) {
  turbo::CodingConfig cc;
  cc.info_bits = P["info_bits"];
  cc.equalizer_memory = P["equalizer_memory"];
  cc.inner_iterations = P["inner_iterations"];
  cc.outer_iterations = P["outer_iterations"];
  cc.early_stop = P["early_stop"];
  cc.omega = P["omega"][0];
  cc.beta = P["beta"][0];
  cc.eps_W = P["eps_w"][0];
  cc.W = bandwidth;
  cc.c = rrc_min_c(cc.beta, cc.eps_W);
  cc.tau = P["tau"].empty() ? tau_star(cc.omega, cc.c, eta_at(cc.omega, cc.eps_W), cc.beta) : P["tau"][0].get<double>();
  return cc;
}

inline Plan plan_fig7(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  plan.tables = {{"", find_experiment("fig7-bler")->columns}};
  const auto methods = names(P, "methods");
  const auto snrs = list(P, "snr_db");
  for (std::size_t i = 0; i < snrs.size(); ++i) plan.points.push_back({{"snr_db", snrs[i]}, {"snr_index", i}});
  plan.parallel_points = false;
  const std::size_t blocks = P["blocks"], chunk = P["chunk_blocks"], samples = P["rcu_samples"];
  const std::uint64_t seed = cfg.seed;
  // Shared across points: built on first use.
  auto system = std::make_shared<std::optional<turbo::TurboSystem>>();
  auto sys_mutex = std::make_shared<std::mutex>();
  const json params = P;
  plan.eval = [=](const json& pt, PointContext& ctx) {
    const double snr = pt["snr_db"];
    const std::size_t idx = pt["snr_index"];
    const turbo::CodingConfig cc = fig7_coding(params);
    const double rho = db_to_linear(snr);
    const double R = static_cast<double>(cc.info_bits) / cc.omega;
    PointResult r;
    r.diagnostics = {{"tau", cc.tau}, {"c", cc.c}, {"rate", R}};
    if (has(methods, "turbo")) {
      {
        std::lock_guard lock(*sys_mutex);
        if (!system->has_value()) system->emplace(cc);
      }
      const turbo::TurboSystem& sys = **system;
      turbo::BlerPoint bp;
      bp.snr_db = snr;
      if (ctx.resume) {
        bp.blocks = (*ctx.resume)["blocks"];
        bp.block_errors = (*ctx.resume)["block_errors"];
        bp.iteration_sum = (*ctx.resume)["iteration_sum"];
      }
      while (bp.blocks < blocks) {
        const std::size_t end = std::min(blocks, bp.blocks + chunk);
        sys.simulate(bp, idx, bp.blocks, end, seed, ctx.workers);
        ctx.record({{"blocks", bp.blocks}, {"block_errors", bp.block_errors}, {"iteration_sum", bp.iteration_sum}});
      }
      bp.finalize();
      r.rows.push_back({0, {num(snr), "turbo", num(bp.blocks), num(bp.block_errors), num(bp.bler), num(bp.ci_low),
                            num(bp.ci_high), num(bp.mean_iterations)}});
    }
    ChannelOptions copt;
    copt.symbols = turbo::frame_symbols(cc);
    const ChannelModel ch = make_channel(make_rrc(cc.beta, bandwidth, cc.c), cc.omega, rho, cc.tau, bandwidth, copt);
    auto bound = [&](const char* name, double v) { r.rows.push_back({0, {num(snr), name, "", "", num(v), "", "", ""}}); };
    if (has(methods, "na")) bound("na", na_bler(ch, R));
    if (has(methods, "mc"))
      bound("mc", invert_rate([&](double pe) { return *mc_rate(ch, pe).rate_bps_hz; }, R));
    if (has(methods, "rcu")) bound("rcu", *rcu_bler(ch, R, samples, derive_seed(ctx.seed, 1), ctx.workers).bler);
    return r;
  };
  return plan;
}

inline Plan plan_custom(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Plan plan;
  plan.tables = {{"", find_experiment("custom")->columns}};
  for (double omega : list(P, "omega"))
    for (double snr : list(P, "snr_db"))
      for (double tau : list(P, "tau"))
        for (double beta : list(P, "beta"))
          for (double eps : list(P, "eps_w"))
            for (double pe : list(P, "pe"))
              plan.points.push_back(
                  {{"omega", omega}, {"snr_db", snr}, {"tau", tau}, {"beta", beta}, {"eps_w", eps}, {"pe", pe}});
  const auto methods = names(P, "methods");
  const std::size_t samples = P["rcu_samples"];
  plan.eval = [methods, samples](const json& pt, PointContext& ctx) {
    const double omega = pt["omega"], snr = pt["snr_db"], tau = pt["tau"], beta = pt["beta"], eps = pt["eps_w"],
                 pe = pt["pe"];
    const double rho = db_to_linear(snr);
    const double c = rrc_min_c(beta, eps);
    require(omega > c, ErrorCode::pulse_exceeds_window, "omega must exceed the pulse TBP");
    const Pulse p = make_rrc(beta, bandwidth, c);
    const ChannelModel ch = make_channel(p, omega, rho, tau, bandwidth);
    PointResult r;
    auto emit = [&](const char* m, double v) {
      r.rows.push_back({0, {num(omega), num(snr), num(tau), num(beta), num(eps), num(pe), num(c), num(ch.N), m, num(v)}});
    };
    if (has(methods, "capacity")) emit("capacity", capacity_ftn(p, tau, rho, bandwidth));
    if (has(methods, "na")) emit("na", na_rate(ch, pe));
    if (has(methods, "mc")) emit("mc", *mc_rate(ch, pe).rate_bps_hz);
    if (has(methods, "rcu")) emit("rcu", *rcu_rate(ch, pe, samples, ctx.seed, ctx.workers).rate_bps_hz);
    return r;
  };
  return plan;
}

}  // namespace detail

inline Plan make_plan(const ExperimentConfig& cfg) {
  const std::string& id = cfg.experiment;
  if (id == "fig2") return detail::plan_fig2(cfg);
  if (id == "fig3") return detail::plan_fig3(cfg);
  if (id == "fig4-oob") return detail::plan_fig4(cfg);
  if (id == "fig5-snr") return detail::plan_fig5(cfg);
  if (id == "fig6-pulses") return detail::plan_fig6(cfg);
  if (id == "table1-opt") return detail::plan_table1(cfg);
  if (id == "fig7-bler") return detail::plan_fig7(cfg);
  if (id == "custom") return detail::plan_custom(cfg);
  throw Error(ErrorCode::config_invalid, "unknown experiment '" + id + "'");
}

// ---------------------------------------------------------------------------
// Execution

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool resume = false;
  double checkpoint_seconds = 60.0;
};

struct RunReport {
  bool ok = true;
  std::optional<ErrorCode> error_code;
  std::string error;
  std::vector<std::filesystem::path> files;
  std::size_t resumed_points = 0;
  double wall_seconds = 0.0;
};

inline json result_to_json(const PointResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back({{"table", row.table}, {"cells", row.cells}});
  return {{"rows", rows}, {"diagnostics", r.diagnostics}};
}

inline PointResult result_from_json(const json& j) {
  PointResult r;
  for (const auto& row : j.at("rows")) r.rows.push_back({row.at("table"), row.at("cells").get<std::vector<std::string>>()});
  r.diagnostics = j.at("diagnostics");
  return r;
}

// CSV text for each table, rows ordered by point index.
inline std::vector<std::string> render_tables(const Plan& plan, const std::map<std::size_t, PointResult>& done) {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < plan.tables.size(); ++t) {
    std::string s = csv_line(plan.tables[t].header);
    for (const auto& [idx, res] : done)
      for (const auto& row : res.rows)
        if (row.table == t) s += csv_line(row.cells);
    out.push_back(std::move(s));
  }
  return out;
}

class Checkpoint {
 public:
  Checkpoint(std::filesystem::path path, std::string fingerprint, double interval)
      : path_(std::move(path)), fingerprint_(std::move(fingerprint)), interval_(interval),
        last_(std::chrono::steady_clock::now()) {}

  // Loads a checkpoint written for the same configuration.
  void load(std::map<std::size_t, PointResult>& done) {
    std::ifstream in(path_);
    if (!in) return;
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception&) {
      throw Error(ErrorCode::config_invalid, "checkpoint " + path_.string() + " is unreadable");
    }
    if (j.value("fingerprint", "") != fingerprint_)
      throw Error(ErrorCode::config_invalid, "checkpoint " + path_.string() + " belongs to a different configuration");
    for (const auto& [k, v] : j["completed"].items()) done[std::stoul(k)] = result_from_json(v);
    for (const auto& [k, v] : j["partial"].items()) partial_[std::stoul(k)] = v;
  }

  const json* partial(std::size_t idx) const {
    const auto it = partial_.find(idx);
    return it == partial_.end() ? nullptr : &it->second;
  }

  void record(std::size_t idx, const json& state, const std::map<std::size_t, PointResult>& done, std::mutex& m) {
    std::lock_guard lock(m);
    partial_[idx] = state;
    maybe_save(done, false);
  }

  void complete(std::size_t idx, const std::map<std::size_t, PointResult>& done) {
    partial_.erase(idx);
    maybe_save(done, false);
  }

  void save(const std::map<std::size_t, PointResult>& done) { maybe_save(done, true); }

  void remove() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

 private:
  void maybe_save(const std::map<std::size_t, PointResult>& done, bool force) {
    const auto now = std::chrono::steady_clock::now();
    if (!force && std::chrono::duration<double>(now - last_).count() < interval_) return;
    last_ = now;
    json j;
    j["fingerprint"] = fingerprint_;
    j["completed"] = json::object();
    for (const auto& [k, v] : done) j["completed"][std::to_string(k)] = result_to_json(v);
    j["partial"] = json::object();
    for (const auto& [k, v] : partial_) j["partial"][std::to_string(k)] = v;
    const auto tmp = path_.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << j.dump();
    }
    std::filesystem::rename(tmp, path_);
  }

  std::filesystem::path path_;
  std::string fingerprint_;
  double interval_;
  std::chrono::steady_clock::time_point last_;
  std::map<std::size_t, json> partial_;
};

// Evaluates every point; completed results land in `done` even when a later point fails.
inline void execute(const Plan& plan, const ExperimentConfig& cfg, std::map<std::size_t, PointResult>& done,
                    Checkpoint* ckpt = nullptr) {
  std::mutex m;
  const unsigned workers = resolve_workers(cfg.workers);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < plan.points.size(); ++i)
    if (!done.count(i)) todo.push_back(i);
  const unsigned outer = plan.parallel_points ? workers : 1;
  const unsigned inner = plan.parallel_points ? 1 : workers;
  parallel_for(todo.size(), outer, [&](std::size_t k) {
    const std::size_t idx = todo[k];
    PointContext ctx;
    ctx.index = idx;
    ctx.seed = derive_seed(cfg.seed, idx);
    ctx.workers = inner;
    if (ckpt) {
      std::lock_guard lock(m);
      ctx.resume = ckpt->partial(idx);
    }
    std::optional<json> resume_copy;
    if (ctx.resume) {
      resume_copy = *ctx.resume;
      ctx.resume = &*resume_copy;
    }
    ctx.record = [&, idx](const json& state) {
      if (ckpt) ckpt->record(idx, state, done, m);
    };
    PointResult r = plan.eval(plan.points[idx], ctx);
    std::lock_guard lock(m);
    done[idx] = std::move(r);
    if (ckpt) ckpt->complete(idx, done);
  });
}

inline json versions() {
  return {{"ftnlim", tool_version},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__VERSION__)
          {"compiler", __VERSION__},
#endif
          {"cxx", static_cast<long>(__cplusplus)}};
}

inline std::filesystem::path table_path(const RunOptions& opt, const ExperimentConfig& cfg, const Table& t) {
  return opt.out_dir / (cfg.output + (t.suffix.empty() ? "" : "_" + t.suffix) + ".csv");
}

// Runs a validated config and writes CSV files plus a manifest (also on failure).
inline RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  RunReport rep;
  const auto start = std::chrono::steady_clock::now();
  const json echo = config_echo(cfg);
  json echo_for_hash = echo;
  echo_for_hash.erase("workers");
  const std::string fingerprint = std::to_string(fnv1a(echo_for_hash.dump()));
  std::filesystem::create_directories(opt.out_dir);
  Checkpoint ckpt(opt.out_dir / (cfg.output + ".checkpoint.json"), fingerprint, opt.checkpoint_seconds);
  std::map<std::size_t, PointResult> done;
  if (opt.resume) {
    ckpt.load(done);
    rep.resumed_points = done.size();
  }
  Plan plan;
  try {
    plan = make_plan(cfg);
    execute(plan, cfg, done, &ckpt);
  } catch (const Error& e) {
    rep.ok = false;
    rep.error_code = e.code();
    rep.error = e.what();
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
  }
  if (!rep.ok) ckpt.save(done);

  const auto csv = render_tables(plan, done);
  for (std::size_t t = 0; t < plan.tables.size(); ++t) {
    const auto path = table_path(opt, cfg, plan.tables[t]);
    std::ofstream out(path, std::ios::binary);
    out << csv[t];
    rep.files.push_back(path);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["status"] = rep.ok ? "ok" : "FAILED";
  manifest["experiment"] = cfg.experiment;
  manifest["seed"] = cfg.seed;
  manifest["workers"] = resolve_workers(cfg.workers);
  manifest["config"] = echo;
  manifest["versions"] = versions();
  manifest["wall_time_s"] = rep.wall_seconds;
  manifest["resumed_points"] = rep.resumed_points;
  json files = json::array();
  for (const auto& f : rep.files) files.push_back(f.filename().string());
  manifest["outputs"] = files;
  json points = json::array();
  for (std::size_t i = 0; i < plan.points.size(); ++i) {
    json p{{"index", i}, {"params", plan.points[i]}};
    const auto it = done.find(i);
    p["completed"] = it != done.end();
    if (it != done.end()) p["diagnostics"] = it->second.diagnostics;
    points.push_back(std::move(p));
  }
  manifest["points"] = points;
  if (!rep.ok)
    manifest["error"] = {{"code", rep.error_code ? to_string(*rep.error_code) : "exception"}, {"message", rep.error}};
  const auto mpath = opt.out_dir / (cfg.output + ".manifest.json");
  {
    std::ofstream out(mpath, std::ios::binary);
    out << manifest.dump(2) << '\n';
  }
  rep.files.push_back(mpath);
  if (rep.ok) ckpt.remove();
  return rep;
}

}  // namespace ftn::cli
