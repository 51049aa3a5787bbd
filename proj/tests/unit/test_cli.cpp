#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sweep/cli/runner.hpp"
#include "test_helpers.hpp"

namespace sweep::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kScenarios = SCENARIO_DIR;
const fs::path kFixtures = FIXTURE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sweepctl_test_" + name);
  fs::remove_all(p);
  return p;
}

int sweepctl(const std::string& args) {
  const std::string cmd = std::string(SWEEPCTL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<fs::path> shipped_scenarios() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    if (e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Cli, ShippedScenariosExitZero) {
  const auto files = shipped_scenarios();
  ASSERT_GE(files.size(), 5u);
  for (const auto& f : files) {
    const fs::path out = scratch(f.stem().string());
    EXPECT_EQ(sweepctl("run --quiet --scenario " + f.string() + " --out-dir " + out.string()), 0) << f;
    EXPECT_TRUE(fs::exists(out / "trajectory.csv"));
    EXPECT_TRUE(fs::exists(out / "report.json"));
  }
}

TEST(Cli, BrokenScenariosExitOne) {
  for (const char* name : {"broken_syntax.json", "broken_x0_outside.json", "broken_step_safety.json",
                           "broken_unknown_key.json", "broken_unknown_check.json", "does_not_exist.json"}) {
    EXPECT_EQ(sweepctl("run --scenario " + (kFixtures / name).string() + " --out-dir " + scratch("broken").string()), 1)
        << name;
  }
}

TEST(Cli, ZeroSlackCoarseGridExitsTwo) {
  EXPECT_EQ(sweepctl("run --scenario " + (kFixtures / "zero_slack_coarse.json").string() + " --out-dir " +
                     scratch("zero").string()),
            2);
}

TEST(Cli, BadFlagsExitOne) {
  const std::string s = (kScenarios / "halfspace_absorption.json").string();
  EXPECT_EQ(sweepctl("run --scenario " + s + " --checks not_a_check --out-dir " + scratch("flags").string()), 1);
  EXPECT_EQ(sweepctl("run"), 1);
  EXPECT_EQ(sweepctl("sweep --scenario " + s + " --param q --values 1"), 1);
}

TEST(Cli, RerunsAreBitIdentical) {
  for (const auto& f : shipped_scenarios()) {
    const fs::path a = scratch("rerun_a");
    const fs::path b = scratch("rerun_b");
    ASSERT_EQ(sweepctl("run --quiet --seed 5 --scenario " + f.string() + " --out-dir " + a.string()), 0);
    ASSERT_EQ(sweepctl("run --quiet --seed 5 --scenario " + f.string() + " --out-dir " + b.string()), 0);
    EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv")) << f;
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json")) << f;
  }
}

TEST(Cli, TrajectoryCsvLayout) {
  const fs::path out = scratch("csv");
  ASSERT_EQ(sweepctl("run --scenario " + (kScenarios / "ball_complement_slide.json").string() + " --out-dir " +
                     out.string()),
            0);
  std::ifstream in(out / "trajectory.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "t,x_0,x_1,v_0,v_1,active_set_size");
  EXPECT_EQ(first, "0,2,0.5,-1,0,0");
  std::size_t rows = 1;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3001u);
}

TEST(Cli, ReportJsonFields) {
  const fs::path out = scratch("report");
  ASSERT_EQ(sweepctl("run --scenario " + (kScenarios / "box_gradient_flow.json").string() + " --out-dir " +
                     out.string() + " --checks energy_identity,velocity_field_bound"),
            0);
  const auto j = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["scenario_digest"], scenario_digest(parse_scenario(kScenarios / "box_gradient_flow.json").scenario));
  ASSERT_EQ(j["checks"].size(), 2u);
  EXPECT_EQ(j["checks"][0]["name"], "energy_identity");
  for (const auto& c : j["checks"]) {
    for (const char* key : {"name", "measured", "bound", "slack", "pass"}) EXPECT_TRUE(c.contains(key)) << key;
  }
  EXPECT_TRUE(j["overall_pass"].get<bool>());
}

TEST(Cli, FlagSeedOverridesFile) {
  RunOptions opts;
  opts.seed = 99;
  opts.checks = std::vector<std::string>{"two_solution_bound"};
  const ScenarioFile f = apply_overrides(parse_scenario(kScenarios / "linear_decay.json"), opts);
  EXPECT_EQ(f.seed, 99u);
  ASSERT_EQ(f.checks.size(), 1u);
  const RunResult a = execute(f);
  ScenarioFile g = f;
  g.seed = 100;
  const RunResult b = execute(g);
  EXPECT_NE(a.report.checks[0].note, b.report.checks[0].note);
}

TEST(Cli, ChecksFlagKeepsFileOverrides) {
  RunOptions opts;
  opts.checks = std::vector<std::string>{"energy_identity", "liminf_lower"};
  const ScenarioFile f = apply_overrides(parse_scenario(kFixtures / "zero_slack_coarse.json"), opts);
  ASSERT_EQ(f.checks.size(), 2u);
  EXPECT_EQ(f.checks[0].slack, 0.0);
  EXPECT_FALSE(f.checks[1].slack.has_value());
}

TEST(Sweep, StepResidualsDecreaseLinearly) {
  const fs::path out = scratch("sweep_h");
  RunOptions opts;
  opts.scenario = kFixtures / "energy_sweep.json";
  opts.out_dir = out;
  opts.quiet = true;
  std::ostringstream so, se;
  ASSERT_EQ(sweep(opts, "h", {1e-2, 5e-3, 2.5e-3}, so, se), 0) << se.str();
  std::vector<double> residuals;
  for (int i = 0; i < 3; ++i) {
    const auto j = nlohmann::json::parse(slurp(out / ("variant_00" + std::to_string(i)) / "report.json"));
    residuals.push_back(j["checks"][0]["measured"].get<double>());
  }
  EXPECT_NEAR(residuals[1] / residuals[0], 0.5, 0.15);
  EXPECT_NEAR(residuals[2] / residuals[1], 0.5, 0.15);
  const std::string summary = slurp(out / "sweep_summary.csv");
  EXPECT_EQ(summary.rfind("variant,value,overall_pass,max_residual,status\n", 0), 0u);
}

TEST(Sweep, SingleValueMatchesRun) {
  const fs::path sweep_dir = scratch("sweep_one");
  const fs::path run_dir = scratch("run_one");
  const std::string s = (kScenarios / "polytope_gradient.json").string();
  ASSERT_EQ(sweepctl("sweep --quiet --scenario " + s + " --param h --values 0.001 --out-dir " + sweep_dir.string()), 0);
  ASSERT_EQ(sweepctl("run --quiet --scenario " + s + " --out-dir " + run_dir.string()), 0);
  EXPECT_EQ(slurp(sweep_dir / "variant_000" / "trajectory.csv"), slurp(run_dir / "trajectory.csv"));
  EXPECT_EQ(slurp(sweep_dir / "variant_000" / "report.json"), slurp(run_dir / "report.json"));
}

TEST(Sweep, UnionMembersAreNeverCrossed) {
  const fs::path out = scratch("sweep_x0");
  RunOptions opts;
  opts.scenario = kScenarios / "union_drift.json";
  opts.out_dir = out;
  opts.quiet = true;
  std::ostringstream so, se;
  sweep(opts, "x0[0]", {1.5, 1.9, 4.1, 4.9}, so, se);
  const double lower[] = {1.0, 1.0, 4.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    std::ifstream in(out / ("variant_00" + std::to_string(i)) / "trajectory.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const double x = std::stod(line.substr(line.find(',') + 1));
      ASSERT_GE(x, lower[i] - 1e-9) << i;
      ASSERT_LE(x, lower[i] + 1.0 + 1e-9) << i;
    }
  }
}

TEST(Sweep, FailingVariantIsRecordedAndSweepContinues) {
  const fs::path out = scratch("sweep_fail");
  RunOptions opts;
  opts.scenario = kScenarios / "union_drift.json";
  opts.out_dir = out;
  opts.quiet = true;
  std::ostringstream so, se;
  // 3.0 lies in the gap between the members.
  EXPECT_EQ(sweep(opts, "x0[0]", {4.5, 3.0, 1.5}, so, se), 2);
  const std::string summary = slurp(out / "sweep_summary.csv");
  EXPECT_NE(summary.find("1,3,false"), std::string::npos) << summary;
  EXPECT_NE(summary.find("x0 not in C"), std::string::npos) << summary;
  EXPECT_TRUE(fs::exists(out / "variant_002" / "report.json"));
}

TEST(Sweep, OutputIndependentOfScheduling) {
  const fs::path a = scratch("sched_a");
  const fs::path b = scratch("sched_b");
  const std::string s = (kScenarios / "linear_decay.json").string();
  ASSERT_EQ(sweepctl("sweep --quiet --scenario " + s + " --param T --values 1,2,0.5 --out-dir " + a.string()), 0);
  ASSERT_EQ(sweepctl("sweep --quiet --scenario " + s + " --param T --values 1,2,0.5 --out-dir " + b.string()), 0);
  EXPECT_EQ(slurp(a / "sweep_summary.csv"), slurp(b / "sweep_summary.csv"));
  for (const char* v : {"variant_000", "variant_001", "variant_002"}) {
    EXPECT_EQ(slurp(a / v / "report.json"), slurp(b / v / "report.json"));
    EXPECT_EQ(slurp(a / v / "trajectory.csv"), slurp(b / v / "trajectory.csv"));
  }
}

}  // namespace
}  // namespace sweep::cli
