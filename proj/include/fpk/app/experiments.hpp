#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fpk/app/config.hpp"
#include "fpk/fpk.hpp"

namespace fpk::app {

struct Snapshot {
  double time = 0;
  double mass = 0;
  double l1_stationary = 0;
  std::optional<double> l1_reference;
  Vector<double> values;  // empty once the run has blown up
};

struct RunReport {
  RunConfig config;
  double dt = 0;
  std::vector<Snapshot> snapshots;  // first entry is t = 0
  double wall_time_seconds = 0;
  long long steps = 0;
  bool blowup = false;
  std::optional<NewtonStats> newton;

  double initial_mass = 0;
  double max_step_mass_change = 0;  // max |m_{n+1} - m_n| / m_n over all steps
  double max_norm_deviation = 0;    // max |L1 norm - mass| / mass over all steps
  double min_value = 0;
  double stationary_u = 0;

  double final_l1_stationary() const;
  double avg_l1_stationary() const;
  std::optional<double> avg_l1_reference() const;
};

/// Snapshot times 0, interval, 2 interval, ... with t_end always last.
std::vector<double> snapshot_times(double interval, double t_end);

/// Reference states on their own grid, one per snapshot time.
struct ReferenceSolution {
  Grid<double> grid;
  SchemeId scheme = SchemeId::ExplicitEuler;
  double dt = 0;
  std::vector<double> times;
  std::vector<Vector<double>> states;
  double max_step_mass_change = 0;
};

/// Run at dt = dw^2/(2 sigma2) on n_cells cells with the sweep's model and horizon.
ReferenceSolution compute_reference(const RunConfig& base, Index n_cells, SchemeId scheme);

/// Explicit Euler on space_reference_n_cells cells.
ReferenceSolution space_reference(const RunConfig& base);

/// Heun on time_n_cells cells.
ReferenceSolution time_reference(const RunConfig& base);

/**
 * Integrates config (dt must be set) and records snapshots. Throws NewtonFailure
 * when implicit Euler fails; blow-up is reported through the flag.
 */
RunReport run(const RunConfig& config, const ReferenceSolution* reference = nullptr);

/// Integration loop only, without observers. Returns seconds, steps and blow-up.
struct Timing {
  double seconds = 0;
  long long steps = 0;
  bool blowup = false;
};
Timing time_run(const RunConfig& config);

struct EocRow {
  SchemeId scheme = SchemeId::MPE;
  Index n_cells = 0;
  double dt = 0;
  std::optional<double> ratio;  // refinement factor relative to the previous row
  double avg_l1_reference = 0;
  std::optional<double> eoc;
  bool blowup = false;
  double max_step_mass_change = 0;
  double max_norm_deviation = 0;
};

/// Every scheme of base.schemes on every n_list grid at dt = dw^2/(2 sigma2).
std::vector<EocRow> eoc_space(const RunConfig& base, const ReferenceSolution& reference);

/// MPE, MPRK and implicit Euler (as far as listed in base.schemes) on
/// time_n_cells cells over eoc_dt_list, which must be strictly descending.
std::vector<EocRow> eoc_time(const RunConfig& base, const ReferenceSolution& reference);

/// Order of the finest pair of a scheme's rows.
std::optional<double> asymptotic_eoc(const std::vector<EocRow>& rows, SchemeId scheme);

struct BenchRow {
  SchemeId scheme = SchemeId::MPE;
  std::string dt_token;
  double dt = 0;
  double mean_wall_time = 0;
  double stddev = 0;
  long long steps = 0;
  bool blowup = false;
};

/// base.repeats timed runs per (scheme, bench_dt_list entry) at base.n_cells.
std::vector<BenchRow> bench(const RunConfig& base);

struct ParetoRow {
  SchemeId scheme = SchemeId::MPE;
  int k = 0;
  double dt = 0;
  double median_wall_time = 0;
  double avg_l1_reference = 0;
  double final_l1_stationary = 0;
  long long steps = 0;
  bool blowup = false;
};

/// dt = 0.7^k for k < base.pareto_k_count; median wall time over base.repeats.
std::vector<ParetoRow> pareto(const RunConfig& base, const ReferenceSolution& reference);

}  // namespace fpk::app
