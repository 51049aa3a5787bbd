#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sweep/analysis.hpp"
#include "sweep/cli/scenario_file.hpp"

namespace sweep::cli {

/// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailure = 2;

/// Command-line settings; set members override the scenario file.
struct RunOptions {
  std::filesystem::path scenario;
  std::filesystem::path out_dir = ".";
  std::optional<std::vector<std::string>> checks;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct RunResult {
  Trajectory trajectory;
  VerificationReport report;
};

/// Integrates the scenario and evaluates the requested checks. Check-level
/// failures (including NotConverged) are recorded in the report; integration
/// errors propagate.
RunResult execute(const ScenarioFile& file);

/// Applies --checks and --seed overrides. Unknown check names raise
/// ValidationError.
ScenarioFile apply_overrides(ScenarioFile file, const RunOptions& opts);

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
nlohmann::json report_to_json(const VerificationReport& report);

/// `run`: returns 0 when every check passes, 2 on a check failure and 1 on
/// a parse, validation or integration error.
int run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Parameter varied by `sweep`: "h", "T" or "x0[i]".
struct SweepParam {
  enum class Which { Step, Horizon, X0 } which = Which::Step;
  Eigen::Index index = 0;
};

SweepParam parse_sweep_param(const std::string& text);

/// `sweep`: one run per value, executed concurrently, each writing into
/// out_dir/variant_NNN. A failing variant is recorded in the summary and the
/// sweep continues. Returns 2 if any variant fails.
int sweep(const RunOptions& opts, const std::string& param, const std::vector<double>& values,
          std::ostream& out, std::ostream& err);

}  // namespace sweep::cli
