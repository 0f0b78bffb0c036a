#include "fpk/app/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fpk::app {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr const char* kReferenceDt = "dw^2/(2*sigma2)";

struct Setup {
  OpinionModel<double> model;
  Grid<double> grid;
  ProblemSpec<double> spec;
  State<double> initial;

  explicit Setup(const RunConfig& c)
      : model{c.sigma2, c.lower, c.upper},
        grid(make_grid(c.lower, c.upper, c.n_cells)),
        spec(model.problem(grid)),
        initial(discretize_initial(spec)) {}
};

RunConfig with_grid(const RunConfig& base, Index n_cells, SchemeId scheme, const std::string& dt_token) {
  RunConfig c = base;
  c.n_cells = n_cells;
  c.scheme = scheme;
  c.dt_spec = normalize_dt_token(dt_token);
  c.dt = resolve_dt(*c.dt_spec, c.dw(), c.sigma2);
  return c;
}

double mean_over_positive_times(const RunReport& r, bool reference) {
  ErrorSeries<double> series;
  series.blowup = r.blowup;
  for (const auto& s : r.snapshots) {
    if (s.time <= 0) continue;
    series.push(s.time, reference ? s.l1_reference.value_or(kInf) : s.l1_stationary);
  }
  return time_averaged_l1(series);
}

void fill_orders(std::vector<EocRow>& rows, std::size_t first, std::size_t last) {
  for (std::size_t i = first + 1; i < last; ++i) {
    const double e0 = rows[i - 1].avg_l1_reference;
    const double e1 = rows[i].avg_l1_reference;
    if (std::isfinite(e0) && std::isfinite(e1) && e0 > 0 && e1 > 0 && rows[i].ratio) {
      rows[i].eoc = fpk::eoc<double>({e0, e1}, {*rows[i].ratio}).front();
    }
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

double RunReport::final_l1_stationary() const {
  if (blowup || snapshots.empty()) return kInf;
  return snapshots.back().l1_stationary;
}

double RunReport::avg_l1_stationary() const { return mean_over_positive_times(*this, false); }

std::optional<double> RunReport::avg_l1_reference() const {
  if (snapshots.empty() || !snapshots.front().l1_reference) return std::nullopt;
  return mean_over_positive_times(*this, true);
}

std::vector<double> snapshot_times(double interval, double t_end) {
  if (!(interval > 0) || !(t_end > 0)) throw std::invalid_argument("snapshot_times: interval and t_end must be positive");
  const auto [full, remainder] = step_plan(interval, t_end);
  std::vector<double> times{0.0};
  for (long long k = 1; k <= full; ++k) times.push_back(static_cast<double>(k) * interval);
  if (remainder > 0) times.push_back(t_end);
  times.back() = t_end;
  return times;
}

RunReport run(const RunConfig& config, const ReferenceSolution* reference) {
  const double dt = require_dt(config);
  const Setup setup(config);
  const auto& grid = setup.grid;
  const std::vector<double> times = snapshot_times(config.snapshot_interval, config.t_end);
  if (reference && reference->times.size() != times.size()) {
    throw std::invalid_argument("run: reference snapshots do not match the run's snapshot times");
  }

  RunReport report;
  report.config = config;
  report.dt = dt;
  report.initial_mass = total_mass(setup.initial, grid);
  report.min_value = setup.initial.values.minCoeff();
  report.stationary_u = first_moment(setup.initial, grid);
  const Vector<double> f_inf = stationary_solution(setup.model, grid, report.stationary_u).values;

  auto record = [&](std::size_t k, const Vector<double>& values) {
    Snapshot s;
    s.time = times[k];
    s.mass = total_mass(values, grid);
    s.l1_stationary = l1_distance(values, f_inf, grid.dw);
    if (reference) {
      if (std::abs(reference->times[k] - times[k]) > 1e-9 * std::max(1.0, times[k])) {
        throw std::invalid_argument("run: reference snapshot times differ");
      }
      s.l1_reference = l1_distance(values, restrict_reference(reference->states[k], reference->grid, grid), grid.dw);
    }
    s.values = values;
    report.snapshots.push_back(std::move(s));
  };
  record(0, setup.initial.values);

  std::size_t next = 1;
  State<double> prev = setup.initial;
  double prev_mass = report.initial_mass;
  const double slack = 1e-9 * dt;
  auto observer = [&](const State<double>& s) {
    const double mass = total_mass(s, grid);
    report.max_step_mass_change = std::max(report.max_step_mass_change, std::abs(mass - prev_mass) / std::abs(prev_mass));
    report.max_norm_deviation =
        std::max(report.max_norm_deviation, std::abs(l1_norm(s.values, grid) - mass) / std::abs(mass));
    report.min_value = std::min(report.min_value, s.values.minCoeff());
    while (next < times.size() && times[next] <= s.time + slack) {
      if (std::abs(times[next] - s.time) <= slack) {
        record(next, s.values);
      } else {
        const double theta = (times[next] - prev.time) / (s.time - prev.time);
        record(next, prev.values + theta * (s.values - prev.values));
      }
      ++next;
    }
    prev = s;
    prev_mass = mass;
  };

  const auto start = std::chrono::steady_clock::now();
  const auto result = integrate<double>(setup.initial, setup.spec, config.scheme, dt, config.t_end, observer,
                                        config.integrate_options());
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.steps = result.steps;
  report.blowup = result.blowup;
  if (config.scheme == SchemeId::ImplicitEuler) report.newton = result.newton;
  for (; next < times.size(); ++next) {
    Snapshot s;
    s.time = times[next];
    s.mass = kInf;
    s.l1_stationary = kInf;
    if (reference) s.l1_reference = kInf;
    report.snapshots.push_back(std::move(s));
  }
  return report;
}

Timing time_run(const RunConfig& config) {
  const double dt = require_dt(config);
  const Setup setup(config);
  const auto start = std::chrono::steady_clock::now();
  const auto result =
      integrate<double>(setup.initial, setup.spec, config.scheme, dt, config.t_end, {}, config.integrate_options());
  Timing t;
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.steps = result.steps;
  t.blowup = result.blowup;
  return t;
}

ReferenceSolution compute_reference(const RunConfig& base, Index n_cells, SchemeId scheme) {
  const RunConfig c = with_grid(base, n_cells, scheme, kReferenceDt);
  const RunReport r = run(c);
  if (r.blowup) {
    throw std::runtime_error("reference run (" + std::string(scheme_name(scheme)) + ", N = " +
                             std::to_string(n_cells) + ") blew up");
  }
  ReferenceSolution ref;
  ref.grid = make_grid(c.lower, c.upper, c.n_cells);
  ref.scheme = scheme;
  ref.dt = *c.dt;
  ref.max_step_mass_change = r.max_step_mass_change;
  for (const auto& s : r.snapshots) {
    ref.times.push_back(s.time);
    ref.states.push_back(s.values);
  }
  return ref;
}

ReferenceSolution space_reference(const RunConfig& base) {
  return compute_reference(base, base.space_reference_n_cells, SchemeId::ExplicitEuler);
}

ReferenceSolution time_reference(const RunConfig& base) {
  return compute_reference(base, base.time_n_cells, SchemeId::Heun);
}

std::vector<EocRow> eoc_space(const RunConfig& base, const ReferenceSolution& reference) {
  std::vector<EocRow> rows;
  for (SchemeId scheme : base.schemes) {
    const std::size_t first = rows.size();
    for (std::size_t i = 0; i < base.n_list.size(); ++i) {
      const RunConfig c = with_grid(base, base.n_list[i], scheme, kReferenceDt);
      const RunReport r = run(c, &reference);
      EocRow row;
      row.scheme = scheme;
      row.n_cells = c.n_cells;
      row.dt = *c.dt;
      if (i > 0) row.ratio = static_cast<double>(base.n_list[i]) / static_cast<double>(base.n_list[i - 1]);
      row.avg_l1_reference = *r.avg_l1_reference();
      row.blowup = r.blowup;
      row.max_step_mass_change = r.max_step_mass_change;
      row.max_norm_deviation = r.max_norm_deviation;
      rows.push_back(row);
    }
    fill_orders(rows, first, rows.size());
  }
  return rows;
}

std::vector<EocRow> eoc_time(const RunConfig& base, const ReferenceSolution& reference) {
  std::vector<SchemeId> schemes;
  for (SchemeId s : base.schemes) {
    if (s == SchemeId::MPE || s == SchemeId::MPRK || s == SchemeId::ImplicitEuler) schemes.push_back(s);
  }
  if (schemes.empty()) throw ConfigError("schemes", "time study needs at least one of mpe, mprk, implicit-euler");

  const double dw = (base.upper - base.lower) / static_cast<double>(base.time_n_cells);
  std::vector<double> dts;
  for (const auto& token : base.eoc_dt_list) dts.push_back(resolve_dt(token, dw, base.sigma2));
  for (std::size_t i = 1; i < dts.size(); ++i) {
    if (!(dts[i] < dts[i - 1])) throw ConfigError("eoc_dt_list", "step sizes must be strictly descending");
  }

  std::vector<EocRow> rows;
  for (SchemeId scheme : schemes) {
    const std::size_t first = rows.size();
    for (std::size_t i = 0; i < dts.size(); ++i) {
      const RunConfig c = with_grid(base, base.time_n_cells, scheme, base.eoc_dt_list[i]);
      const RunReport r = run(c, &reference);
      EocRow row;
      row.scheme = scheme;
      row.n_cells = c.n_cells;
      row.dt = *c.dt;
      if (i > 0) row.ratio = dts[i - 1] / dts[i];
      row.avg_l1_reference = *r.avg_l1_reference();
      row.blowup = r.blowup;
      row.max_step_mass_change = r.max_step_mass_change;
      row.max_norm_deviation = r.max_norm_deviation;
      rows.push_back(row);
    }
    fill_orders(rows, first, rows.size());
  }
  return rows;
}

std::optional<double> asymptotic_eoc(const std::vector<EocRow>& rows, SchemeId scheme) {
  std::optional<double> last;
  for (const auto& r : rows) {
    if (r.scheme == scheme) last = r.eoc;
  }
  return last;
}

std::vector<BenchRow> bench(const RunConfig& base) {
  std::vector<BenchRow> rows;
  for (SchemeId scheme : base.schemes) {
    for (const auto& token : base.bench_dt_list) {
      const RunConfig c = with_grid(base, base.n_cells, scheme, token);
      BenchRow row;
      row.scheme = scheme;
      row.dt_token = *c.dt_spec;
      row.dt = *c.dt;
      std::vector<double> seconds;
      for (int i = 0; i < base.repeats; ++i) {
        const Timing t = time_run(c);
        seconds.push_back(t.seconds);
        row.steps = t.steps;
        row.blowup = t.blowup;
      }
      const double n = static_cast<double>(seconds.size());
      row.mean_wall_time = std::accumulate(seconds.begin(), seconds.end(), 0.0) / n;
      if (seconds.size() > 1) {
        double ss = 0;
        for (double s : seconds) ss += (s - row.mean_wall_time) * (s - row.mean_wall_time);
        row.stddev = std::sqrt(ss / (n - 1));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<ParetoRow> pareto(const RunConfig& base, const ReferenceSolution& reference) {
  std::vector<ParetoRow> rows;
  for (SchemeId scheme : base.schemes) {
    for (int k = 0; k < base.pareto_k_count; ++k) {
      const RunConfig c = with_grid(base, base.n_cells, scheme, "0.7^" + std::to_string(k));
      std::vector<double> seconds;
      for (int i = 0; i < base.repeats; ++i) seconds.push_back(time_run(c).seconds);
      const RunReport r = run(c, &reference);
      ParetoRow row;
      row.scheme = scheme;
      row.k = k;
      row.dt = *c.dt;
      row.median_wall_time = median(seconds);
      row.avg_l1_reference = *r.avg_l1_reference();
      row.final_l1_stationary = r.final_l1_stationary();
      row.steps = r.steps;
      row.blowup = r.blowup;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace fpk::app
