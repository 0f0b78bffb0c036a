#include "fpk/app/output.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace fpk::app {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw OutputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path);
  if (!out) throw OutputError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw OutputError("write to " + path.string() + " failed");
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["sigma2"] = c.sigma2;
  j["n_cells"] = c.n_cells;
  j["lower"] = c.lower;
  j["upper"] = c.upper;
  j["scheme"] = std::string(scheme_name(c.scheme));
  j["dt_spec"] = c.dt_spec ? nlohmann::json(*c.dt_spec) : nlohmann::json();
  j["dt"] = c.dt ? nlohmann::json(*c.dt) : nlohmann::json();
  j["t_end"] = c.t_end;
  j["snapshot_interval"] = c.snapshot_interval;
  j["output_dir"] = c.output_dir;
  j["blowup_guard"] = c.blowup_guard;
  j["newton_tol"] = c.newton_tol;
  j["newton_max_iters"] = c.newton_max_iters;
  j["jacobian_mode"] = std::string(jacobian_mode_name(c.jacobian_mode));
  return j;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_solution_csv(const std::filesystem::path& path, const RunReport& report) {
  auto out = open_for_writing(path);
  const Grid<double> grid = make_grid(report.config.lower, report.config.upper, report.config.n_cells);
  out << "t,w,f\n";
  for (const auto& s : report.snapshots) {
    if (s.values.size() == 0) continue;
    const std::string t = format_number(s.time);
    for (Index i = 0; i < s.values.size(); ++i) {
      out << t << ',' << format_number(grid.centers[i]) << ',' << format_number(s.values[i]) << '\n';
    }
  }
  finish(out, path);
}

void write_errors_csv(const std::filesystem::path& path, const RunReport& report) {
  auto out = open_for_writing(path);
  out << "t,l1_stationary\n";
  for (const auto& s : report.snapshots) out << format_number(s.time) << ',' << format_number(s.l1_stationary) << '\n';
  finish(out, path);
}

std::string report_json(const RunReport& report) {
  nlohmann::json j;
  j["config"] = config_json(report.config);
  j["dt"] = report.dt;
  j["wall_time_seconds"] = report.wall_time_seconds;
  j["steps_taken"] = report.steps;
  j["blowup"] = report.blowup;
  j["initial_mass"] = report.initial_mass;
  j["stationary_u"] = report.stationary_u;
  j["max_step_mass_change"] = number_or_null(report.max_step_mass_change);
  j["max_norm_deviation"] = number_or_null(report.max_norm_deviation);
  j["min_value"] = number_or_null(report.min_value);
  j["final_l1_stationary"] = number_or_null(report.final_l1_stationary());
  j["avg_l1_stationary"] = number_or_null(report.avg_l1_stationary());
  if (report.newton) {
    j["newton_iteration_stats"] = {{"steps", report.newton->steps},
                                   {"total_iterations", report.newton->total_iterations},
                                   {"max_iterations", report.newton->max_iterations}};
  } else {
    j["newton_iteration_stats"] = nullptr;
  }
  auto snaps = nlohmann::json::array();
  for (const auto& s : report.snapshots) {
    nlohmann::json row{{"time", s.time}, {"mass", number_or_null(s.mass)}, {"l1_vs_stationary", number_or_null(s.l1_stationary)}};
    if (s.l1_reference) row["l1_vs_reference"] = number_or_null(*s.l1_reference);
    snaps.push_back(std::move(row));
  }
  j["snapshots"] = std::move(snaps);
  return j.dump(2);
}

void write_report_json(const std::filesystem::path& path, const RunReport& report) {
  auto out = open_for_writing(path);
  out << report_json(report) << '\n';
  finish(out, path);
}

void write_eoc_space_csv(const std::filesystem::path& path, const std::vector<EocRow>& rows) {
  auto out = open_for_writing(path);
  out << "scheme,N,dt,ratio,avg_l1_vs_reference,eoc\n";
  for (const auto& r : rows) {
    out << scheme_name(r.scheme) << ',' << r.n_cells << ',' << format_number(r.dt) << ',' << optional_number(r.ratio)
        << ',' << format_number(r.avg_l1_reference) << ',' << optional_number(r.eoc) << '\n';
  }
  finish(out, path);
}

void write_eoc_time_csv(const std::filesystem::path& path, const std::vector<EocRow>& rows) {
  auto out = open_for_writing(path);
  out << "scheme,dt,N,ratio,avg_l1_vs_reference,eoc\n";
  for (const auto& r : rows) {
    out << scheme_name(r.scheme) << ',' << format_number(r.dt) << ',' << r.n_cells << ',' << optional_number(r.ratio)
        << ',' << format_number(r.avg_l1_reference) << ',' << optional_number(r.eoc) << '\n';
  }
  finish(out, path);
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  auto out = open_for_writing(path);
  out << "scheme,dt_token,dt,mean_wall_time,stddev,steps,blowup\n";
  for (const auto& r : rows) {
    out << scheme_name(r.scheme) << ',' << r.dt_token << ',' << format_number(r.dt) << ','
        << format_number(r.mean_wall_time) << ',' << format_number(r.stddev) << ',' << r.steps << ','
        << (r.blowup ? "true" : "false") << '\n';
  }
  finish(out, path);
}

void write_pareto_csv(const std::filesystem::path& path, const std::vector<ParetoRow>& rows) {
  auto out = open_for_writing(path);
  out << "scheme,k,dt,median_wall_time,avg_l1_vs_reference,final_l1_stationary,steps,blowup\n";
  for (const auto& r : rows) {
    out << scheme_name(r.scheme) << ',' << r.k << ',' << format_number(r.dt) << ',' << format_number(r.median_wall_time)
        << ',' << format_number(r.avg_l1_reference) << ',' << format_number(r.final_l1_stationary) << ',' << r.steps
        << ',' << (r.blowup ? "true" : "false") << '\n';
  }
  finish(out, path);
}

}  // namespace fpk::app
