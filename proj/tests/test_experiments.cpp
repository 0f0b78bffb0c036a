#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpk/app/experiments.hpp"
#include "fpk/app/output.hpp"

using namespace fpk;
using namespace fpk::app;

namespace {

RunConfig small(SchemeId scheme, const std::string& dt, double t_end = 1.0) {
  return parse_config("n_cells = 40\nsnapshot_interval = 0.1", {{"scheme", std::string(scheme_name(scheme))},
                                                                 {"dt", dt},
                                                                 {"t_end", std::to_string(t_end)}});
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(SnapshotTimes, RegularAndRemainder) {
  EXPECT_EQ(snapshot_times(0.5, 2.0), (std::vector<double>{0, 0.5, 1.0, 1.5, 2.0}));
  EXPECT_EQ(snapshot_times(0.4, 1.0), (std::vector<double>{0, 0.4, 0.8, 1.0}));
  const auto t = snapshot_times(0.1, 10.0);
  EXPECT_EQ(t.size(), 101u);
  EXPECT_EQ(t.back(), 10.0);
}

TEST(Run, SnapshotsAtEveryInterval) {
  const RunReport r = run(small(SchemeId::MPRK, "dw^2/(2*sigma2)"));
  ASSERT_EQ(r.snapshots.size(), 11u);
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) EXPECT_NEAR(r.snapshots[k].time, 0.1 * k, 1e-12);
  EXPECT_EQ(r.steps, 160);
  EXPECT_FALSE(r.blowup);
  EXPECT_FALSE(r.newton.has_value());
}

TEST(Run, MassColumnConstantForConservativeSchemes) {
  for (SchemeId s : {SchemeId::MPE, SchemeId::MPRK, SchemeId::ExplicitEuler, SchemeId::Heun}) {
    const RunReport r = run(small(s, "dw^2/(2*sigma2)"));
    for (const auto& snap : r.snapshots) EXPECT_NEAR(snap.mass, 1.0, 1e-12) << scheme_name(s);
    EXPECT_LE(r.max_step_mass_change, 1e-13) << scheme_name(s);
  }
}

TEST(Run, InterpolatesBetweenSteps) {
  // dt = 0.3 does not land on 0.1-spaced snapshots
  const RunReport r = run(small(SchemeId::MPE, "0.3"));
  ASSERT_EQ(r.snapshots.size(), 11u);
  for (const auto& snap : r.snapshots) EXPECT_NEAR(snap.mass, 1.0, 1e-12);
  EXPECT_EQ(r.steps, 4);
}

TEST(Run, ExplicitBlowupIsFlagged) {
  const RunReport r = run(small(SchemeId::ExplicitEuler, "10*dw", 10.0));
  EXPECT_TRUE(r.blowup);
  EXPECT_TRUE(std::isinf(r.final_l1_stationary()));
  EXPECT_TRUE(std::isinf(r.avg_l1_stationary()));
  EXPECT_EQ(r.snapshots.size(), 101u);
}

TEST(Run, ImplicitEulerReportsNewtonStats) {
  const RunReport r = run(small(SchemeId::ImplicitEuler, "0.05", 0.5));
  ASSERT_TRUE(r.newton);
  EXPECT_EQ(r.newton->steps, 10);
  EXPECT_GE(r.newton->total_iterations, 10);
}

TEST(Run, MissingDtThrowsConfigError) {
  RunConfig c = parse_config("");
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Run, DeterministicFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "fpk_test_determinism";
  std::filesystem::remove_all(dir);
  for (int i = 0; i < 2; ++i) {
    const RunReport r = run(small(SchemeId::MPRK, "dw"));
    write_solution_csv(dir / std::to_string(i) / "solution.csv", r);
    write_errors_csv(dir / std::to_string(i) / "errors.csv", r);
  }
  EXPECT_EQ(slurp(dir / "0" / "solution.csv"), slurp(dir / "1" / "solution.csv"));
  EXPECT_EQ(slurp(dir / "0" / "errors.csv"), slurp(dir / "1" / "errors.csv"));
  EXPECT_EQ(slurp(dir / "0" / "errors.csv").rfind("t,l1_stationary\n", 0), 0u);
  std::filesystem::remove_all(dir);
}

TEST(Output, NumbersUseSeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  const double x = 0.0015625 / 3;
  EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Output, ReportJsonHasSchemaKeys) {
  const RunReport r = run(small(SchemeId::ExplicitEuler, "10*dw", 10.0));
  const std::string j = report_json(r);
  for (const char* key : {"\"config\"", "\"snapshots\"", "\"wall_time_seconds\"", "\"steps_taken\"", "\"blowup\": true",
                          "\"newton_iteration_stats\": null", "\"l1_vs_stationary\": null"}) {
    EXPECT_NE(j.find(key), std::string::npos) << key;
  }
}

TEST(EocSpace, RatioColumnIsTwo) {
  RunConfig base = parse_config("t_end = 0.2\nsnapshot_interval = 0.1\nschemes = mpe\nn_list = 10, 20, 40\n"
                                "space_reference_n_cells = 80");
  const auto ref = space_reference(base);
  const auto rows = eoc_space(base, ref);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].ratio);
  EXPECT_EQ(*rows[1].ratio, 2.0);
  EXPECT_EQ(*rows[2].ratio, 2.0);
  EXPECT_TRUE(rows[2].eoc.has_value());
  EXPECT_GT(rows[0].avg_l1_reference, rows[2].avg_l1_reference);
}

TEST(EocTime, RejectsAscendingList) {
  RunConfig base = parse_config("t_end = 0.2\ntime_n_cells = 20\neoc_dt_list = 0.05, 0.1\nschemes = mpe");
  const auto ref = time_reference(base);
  EXPECT_THROW(eoc_time(base, ref), ConfigError);
}

TEST(EocTime, SkipsUnlistedAndExplicitSchemes) {
  RunConfig base = parse_config("t_end = 0.2\ntime_n_cells = 20\neoc_dt_list = 0.1, 0.05\nschemes = heun, mpe");
  const auto rows = eoc_time(base, time_reference(base));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].scheme, SchemeId::MPE);
  EXPECT_EQ(*rows[1].ratio, 2.0);
}

TEST(Bench, FewerStepsForLargerDt) {
  RunConfig base = parse_config("t_end = 1\nschemes = mpe\nrepeats = 2\nn_cells = 20\nbench_dt_list = dw^2/(2*sigma2), dw");
  const auto rows = bench(base);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[0].steps, rows[1].steps);
  EXPECT_GE(rows[0].stddev, 0.0);
}

TEST(Pareto, MedianAndErrors) {
  RunConfig base = parse_config("t_end = 1\nschemes = mprk\nrepeats = 3\nn_cells = 20\npareto_k_count = 3\n"
                                "space_reference_n_cells = 40");
  const auto rows = pareto(base, space_reference(base));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[2].dt, 0.49);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.blowup);
    EXPECT_TRUE(std::isfinite(r.avg_l1_reference));
  }
}
