#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpk/app/experiments.hpp"

namespace fpk::app {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits; non-finite values as inf, -inf, nan.
std::string format_number(double v);

/// Long format `t,w,f`, one row per cell per recorded snapshot.
void write_solution_csv(const std::filesystem::path& path, const RunReport& report);

/// `t,l1_stationary`
void write_errors_csv(const std::filesystem::path& path, const RunReport& report);

/// Config echo, snapshots, timing, blow-up flag and Newton statistics.
std::string report_json(const RunReport& report);
void write_report_json(const std::filesystem::path& path, const RunReport& report);

/// `scheme,N,dt,ratio,avg_l1_vs_reference,eoc` (eoc_space) and
/// `scheme,dt,N,ratio,avg_l1_vs_reference,eoc` (eoc_time).
void write_eoc_space_csv(const std::filesystem::path& path, const std::vector<EocRow>& rows);
void write_eoc_time_csv(const std::filesystem::path& path, const std::vector<EocRow>& rows);

/// `scheme,dt_token,dt,mean_wall_time,stddev,steps,blowup`
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);

/// `scheme,k,dt,median_wall_time,avg_l1_vs_reference,final_l1_stationary,steps,blowup`
void write_pareto_csv(const std::filesystem::path& path, const std::vector<ParetoRow>& rows);

}  // namespace fpk::app
