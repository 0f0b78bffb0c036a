#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpk/integrators.hpp"

namespace fpk::app {

/// Configuration problem tied to a key and, for file input, a line number.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message, int line = 0);

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

/**
 * Settings for a solver run and the experiment sweeps built on it.
 *
 * The `dt` key accepts a positive number or one of the step-size formulas
 * `dw^2/(2*sigma2)`, `dw`, `dw/(2*sigma2)`, `10*dw`, `dw^2.5/(2*sigma2)`,
 * `0.7^k` (integer k >= 0). Formulas are kept as written and resolved against
 * the grid.
 */
struct RunConfig {
  double sigma2 = 0.2;
  Index n_cells = 80;
  double lower = -1.0;
  double upper = 1.0;
  SchemeId scheme = SchemeId::MPRK;
  std::optional<std::string> dt_spec;
  std::optional<double> dt;  // dt_spec resolved on this config's grid
  double t_end = 10.0;
  double snapshot_interval = 0.1;
  std::string output_dir = "fpk_out";

  double blowup_guard = 1e6;
  double newton_tol = 1e-10;
  int newton_max_iters = 50;
  JacobianMode jacobian_mode = JacobianMode::FiniteDifferenceDense;

  // Sweeps.
  std::vector<SchemeId> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  std::vector<Index> n_list{20, 40, 80, 160};
  Index space_reference_n_cells = 640;
  Index time_n_cells = 160;
  std::vector<std::string> eoc_dt_list{"0.1", "0.05", "0.025", "0.0125", "0.00625", "0.003125"};
  std::vector<std::string> bench_dt_list{"dw^2.5/(2*sigma2)", "dw^2/(2*sigma2)", "dw", "dw/(2*sigma2)", "10*dw"};
  int repeats = 5;
  bool pareto = true;
  int pareto_k_count = 19;

  bool operator==(const RunConfig&) const = default;

  double dw() const { return (upper - lower) / static_cast<double>(n_cells); }
  NewtonOptions newton_options() const;
  IntegrateOptions integrate_options() const;
};

/// Evaluates a step-size token on a grid with spacing dw.
double resolve_dt(std::string_view token, double dw, double sigma2);

/// Canonical spelling of a token (whitespace removed, lower case).
std::string normalize_dt_token(std::string_view token);

using Overrides = std::vector<std::pair<std::string, std::string>>;

/**
 * Parses flat `key = value` text. `#` starts a comment, values may be double
 * quoted, lists are comma separated. Overrides are applied after the text with
 * the same key rules. Unknown or repeated keys are rejected.
 */
RunConfig parse_config(std::string_view text, const Overrides& overrides = {});

/// Reads a config file; an empty path yields the defaults plus overrides.
RunConfig load_config(const std::string& path, const Overrides& overrides = {});

/// Serializes every key; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

/// Throws ConfigError("dt", ...) when no step size was given.
double require_dt(const RunConfig& config);

}  // namespace fpk::app
