#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sweep/integrator.hpp"

namespace sweep::cli {

/// Names accepted in the "checks" section, in report order.
const std::vector<std::string>& known_checks();

/// Per-check overrides; unset members fall back to the analysis defaults.
struct CheckSpec {
  std::string name;
  std::optional<double> slack;
  std::optional<double> abs_tol;
  std::optional<double> constant;
  std::optional<std::size_t> window;
  std::optional<double> stop_tol;

  friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

struct OutputSpec {
  std::string trajectory = "trajectory.csv";
  std::string report = "report.json";

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// A parsed and validated scenario document.
struct ScenarioFile {
  Scenario scenario;
  /// Empty means every check applicable to the scenario.
  std::vector<CheckSpec> checks;
  OutputSpec output;
  std::uint64_t seed = 0;

  friend bool operator==(const ScenarioFile& a, const ScenarioFile& b) {
    return a.scenario == b.scenario && a.checks == b.checks && a.output == b.output &&
           a.seed == b.seed;
  }
};

/// Parses scenario text. Malformed JSON raises ParseError with line and
/// column; schema or mathematical problems raise ValidationError naming the
/// offending field.
ScenarioFile parse_scenario_text(std::string_view text);

ScenarioFile parse_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioFile& file);
nlohmann::json scenario_to_json(const Scenario& scenario);
nlohmann::json set_to_json(const ProxSet& set);
nlohmann::json field_to_json(const Field& field);

ProxSet set_from_json(const nlohmann::json& j);
Field field_from_json(const nlohmann::json& j);

/// Checks that apply to the scenario when none are listed.
std::vector<std::string> applicable_checks(const Scenario& scenario);

/// 64-bit FNV-1a hash of the canonical scenario JSON, as 16 hex digits.
std::string scenario_digest(const Scenario& scenario);

}  // namespace sweep::cli
