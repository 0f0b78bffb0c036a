#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fpk/app/config.hpp"
#include "fpk/app/experiments.hpp"
#include "fpk/app/output.hpp"

namespace {

using namespace fpk;
using namespace fpk::app;

enum ExitCode { kOk = 0, kConfig = 1, kNewton = 2, kIo = 3 };

struct Flags {
  std::string config_path;
  std::optional<std::string> scheme;
  std::optional<std::string> dt;
  std::optional<long long> n_cells;
  std::optional<std::string> t_end;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "Config file (key = value)");
  cmd->add_option("--scheme", f.scheme, "mpe | mprk | explicit-euler | heun | implicit-euler");
  cmd->add_option("--dt", f.dt, "Step size: number or dw^2/(2*sigma2), dw, dw/(2*sigma2), 10*dw, dw^2.5/(2*sigma2), 0.7^k");
  cmd->add_option("--n-cells", f.n_cells, "Number of cells");
  cmd->add_option("--t-end", f.t_end, "Final time");
  cmd->add_option("--out", f.out, "Output directory");
}

RunConfig load(const Flags& f) {
  Overrides o;
  if (f.scheme) o.emplace_back("scheme", *f.scheme);
  if (f.dt) o.emplace_back("dt", *f.dt);
  if (f.n_cells) o.emplace_back("n_cells", std::to_string(*f.n_cells));
  if (f.t_end) o.emplace_back("t_end", *f.t_end);
  if (f.out) o.emplace_back("output_dir", *f.out);
  return load_config(f.config_path, o);
}

int cmd_solve(const RunConfig& c) {
  require_dt(c);
  const RunReport r = run(c);
  const std::filesystem::path dir = c.output_dir;
  write_solution_csv(dir / "solution.csv", r);
  write_errors_csv(dir / "errors.csv", r);
  write_report_json(dir / "report.json", r);
  std::cout << scheme_name(c.scheme) << " N=" << c.n_cells << " dt=" << format_number(r.dt) << " steps=" << r.steps
            << " blowup=" << (r.blowup ? "true" : "false") << " final_l1_stationary=" << format_number(r.final_l1_stationary())
            << " wall_time=" << format_number(r.wall_time_seconds) << "s\n";
  return kOk;
}

void print_rows(const std::vector<EocRow>& rows) {
  for (const auto& r : rows) {
    std::cout << scheme_name(r.scheme) << " N=" << r.n_cells << " dt=" << format_number(r.dt)
              << " avg_l1=" << format_number(r.avg_l1_reference) << " eoc=" << (r.eoc ? format_number(*r.eoc) : "-")
              << "\n";
  }
}

int cmd_eoc_space(const RunConfig& c) {
  const ReferenceSolution ref = space_reference(c);
  const auto rows = eoc_space(c, ref);
  write_eoc_space_csv(std::filesystem::path(c.output_dir) / "eoc_space.csv", rows);
  print_rows(rows);
  return kOk;
}

int cmd_eoc_time(const RunConfig& c) {
  const ReferenceSolution ref = time_reference(c);
  const auto rows = eoc_time(c, ref);
  write_eoc_time_csv(std::filesystem::path(c.output_dir) / "eoc_time.csv", rows);
  print_rows(rows);
  return kOk;
}

int cmd_bench(const RunConfig& c) {
  const std::filesystem::path dir = c.output_dir;
  const auto rows = bench(c);
  write_bench_csv(dir / "bench.csv", rows);
  for (const auto& r : rows) {
    std::cout << scheme_name(r.scheme) << " dt=" << r.dt_token << " mean=" << format_number(r.mean_wall_time)
              << "s stddev=" << format_number(r.stddev) << "s steps=" << r.steps << (r.blowup ? " blowup" : "") << "\n";
  }
  if (c.pareto) {
    const ReferenceSolution ref = space_reference(c);
    write_pareto_csv(dir / "pareto.csv", pareto(c, ref));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chang-Cooper / Patankar solver for the opinion Fokker-Planck model"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* solve = app.add_subcommand("solve", "Integrate one configuration");
  CLI::App* space = app.add_subcommand("eoc-space", "Spatial order study");
  CLI::App* time = app.add_subcommand("eoc-time", "Temporal order study");
  CLI::App* bench_cmd = app.add_subcommand("bench", "Wall-time benchmark and cost/accuracy sweep");
  for (CLI::App* cmd : {solve, space, time, bench_cmd}) add_common(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const RunConfig c = load(flags);
    if (solve->parsed()) return cmd_solve(c);
    if (space->parsed()) return cmd_eoc_space(c);
    if (time->parsed()) return cmd_eoc_time(c);
    return cmd_bench(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NewtonFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kNewton;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
}
