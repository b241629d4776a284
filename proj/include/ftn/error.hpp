#pragma once

#include <stdexcept>
#include <string>

namespace ftn {

enum class ErrorCode {
  invalid_argument,
  invalid_roll_off,
  grid_too_coarse,
  energy_mismatch,
  not_found,
  pulse_exceeds_window,
  not_positive_definite,
  domain_violation,
  no_root,
  threshold_not_found,
  insufficient_quadrature,
  no_feasible_multipliers,
  infeasible,
  memory_too_large,
  config_invalid,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_roll_off: return "invalid-roll-off";
    case ErrorCode::grid_too_coarse: return "grid-too-coarse";
    case ErrorCode::energy_mismatch: return "energy-mismatch";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::pulse_exceeds_window: return "pulse-exceeds-window";
    case ErrorCode::not_positive_definite: return "not-positive-definite";
    case ErrorCode::domain_violation: return "domain-violation";
    case ErrorCode::no_root: return "no-root";
    case ErrorCode::threshold_not_found: return "threshold-not-found";
    case ErrorCode::insufficient_quadrature: return "insufficient-quadrature";
    case ErrorCode::no_feasible_multipliers: return "no-feasible-multipliers";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::memory_too_large: return "memory-too-large";
    case ErrorCode::config_invalid: return "config-invalid";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace ftn
