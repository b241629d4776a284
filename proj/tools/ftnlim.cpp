// ftnlim: experiment runner for finite time-bandwidth FTN limits.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "ftn/experiments.hpp"
#include "ftn/log.hpp"
#include "ftn/selftest.hpp"

namespace {

enum Exit { ok = 0, config_error = 1, numeric_failure = 2, selftest_failure = 3 };

std::string schema_text() {
  std::string s = "Experiments and CSV columns:\n";
  for (const auto& e : ftn::cli::experiments()) {
    s += "  " + std::string(e.id) + ": " + e.summary + "\n    columns: ";
    for (std::size_t i = 0; i < e.columns.size(); ++i) s += (i ? "," : "") + e.columns[i];
    s += "\n    keys: seed, workers, output";
    for (const auto& k : e.keys) s += ", " + k;
    s += "\n";
  }
  s += "Exit codes: 0 ok, 1 config error, 2 numeric failure, 3 selftest failure.\n";
  return s;
}

int list_experiments() {
  for (const auto& e : ftn::cli::experiments()) {
    std::printf("%-12s %s\n", e.id, e.summary);
    std::string cols;
    for (std::size_t i = 0; i < e.columns.size(); ++i) cols += (i ? "," : "") + e.columns[i];
    std::printf("%-12s columns: %s\n", "", cols.c_str());
    std::printf("%-12s defaults: %s\n", "", ftn::cli::json::parse(e.defaults).dump().c_str());
  }
  return ok;
}

int run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<unsigned> workers,
        const std::string& out_dir, bool resume, double checkpoint_seconds) {
  ftn::cli::ExperimentConfig cfg;
  try {
    std::ifstream in(path);
    if (!in) throw ftn::Error(ftn::ErrorCode::config_invalid, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = ftn::cli::parse_config(ss.str());
  } catch (const ftn::Error& e) {
    std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
    return config_error;
  }
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  ftn::cli::RunOptions opt;
  opt.out_dir = out_dir;
  opt.resume = resume;
  opt.checkpoint_seconds = checkpoint_seconds;
  ftn::cli::RunReport rep;
  try {
    rep = ftn::cli::run_experiment(cfg, opt);
  } catch (const ftn::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return e.code() == ftn::ErrorCode::config_invalid ? config_error : numeric_failure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return numeric_failure;
  }
  for (const auto& f : rep.files) std::printf("wrote %s\n", f.string().c_str());
  if (rep.resumed_points) std::printf("resumed %zu completed points from checkpoint\n", rep.resumed_points);
  if (!rep.ok) {
    std::fprintf(stderr, "run failed: %s\n", rep.error.c_str());
    return rep.error_code == ftn::ErrorCode::config_invalid ? config_error : numeric_failure;
  }
  std::printf("done in %.1f s\n", rep.wall_seconds);
  return ok;
}

int selftest(const std::string& fault_name) {
  ftn::selftest::Fault fault;
  try {
    fault = ftn::selftest::parse_fault(fault_name);
  } catch (const ftn::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return config_error;
  }
  const auto checks = ftn::selftest::run(fault);
  std::size_t passed = 0;
  for (const auto& c : checks) {
    passed += c.passed;
    std::printf("[%s] %s: %s (%.2f s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str(), c.seconds);
  }
  std::printf("%zu/%zu checks passed\n", passed, checks.size());
  return passed == checks.size() ? ok : selftest_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite time-bandwidth limits of faster-than-Nyquist signaling"};
  app.footer(schema_text());
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out_dir = ".";
  bool resume = false;
  double checkpoint_seconds = 60.0;
  std::string config;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config and write CSV plus manifest");
  run_cmd->add_option("config", config, "JSON experiment config")->required();
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  run_cmd->add_option("--out-dir", out_dir, "Directory for CSV, manifest and checkpoint files");
  run_cmd->add_flag("--resume", resume, "Continue from the checkpoint of an interrupted run");
  run_cmd->add_option("--checkpoint-interval", checkpoint_seconds, "Seconds between checkpoint writes")
      ->check(CLI::PositiveNumber);
  run_cmd->footer(schema_text());

  std::string fault;
  auto* self_cmd = app.add_subcommand("selftest", "Run the fast invariant suite");
  self_cmd->add_option("--inject-fault", fault, "Corrupt one input to prove a check fails (eigenvalue, interleaver)");

  auto* list_cmd = app.add_subcommand("list-experiments", "List experiment ids, CSV columns and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }
  if (*run_cmd) return run(config, seed, workers, out_dir, resume, checkpoint_seconds);
  if (*self_cmd) return selftest(fault);
  if (*list_cmd) return list_experiments();
  return config_error;
}
