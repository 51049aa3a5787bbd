#include <filesystem>
#include <fstream>

#include "sweep/cli/scenario_file.hpp"
#include "test_helpers.hpp"

namespace sweep::cli {
namespace {

const char* kMinimal = R"({
  "set": {"kind": "half_space", "normal": [-1.0], "offset": 0.0},
  "field": {"kind": "constant", "value": [-1.0]},
  "x0": [1.0],
  "T": 2.0,
  "h": 0.001
})";

std::string with_replacement(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  text.replace(pos, from.size(), to);
  return text;
}

std::string error_message(const std::string& text, ErrorCode expected) {
  try {
    parse_scenario_text(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expected) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error for " << text;
  return {};
}

TEST(ParseScenario, MinimalFile) {
  const ScenarioFile f = parse_scenario_text(kMinimal);
  EXPECT_EQ(f.scenario.set().kind_name(), "half_space");
  EXPECT_EQ(f.scenario.num_steps(), 2000u);
  EXPECT_TRUE(f.checks.empty());
  EXPECT_EQ(f.output.trajectory, "trajectory.csv");
  EXPECT_EQ(f.seed, 0u);
}

TEST(ParseScenario, X0OutsideSet) {
  const std::string msg =
      error_message(with_replacement(kMinimal, "\"x0\": [1.0]", "\"x0\": [-1.0]"), ErrorCode::ValidationError);
  EXPECT_NE(msg.find("x0 not in C"), std::string::npos) << msg;
}

TEST(ParseScenario, StepSafetyNamesHMAndProxR) {
  const std::string text = R"({
    "set": {"kind": "disjoint_union", "members": [
      {"kind": "box", "lower": [1.0], "upper": [2.0]},
      {"kind": "box", "lower": [4.0], "upper": [5.0]}]},
    "field": {"kind": "neg_gradient", "potential": {"kind": "quadratic", "q": [[1.0]]}},
    "x0": [4.5], "T": 2.0, "h": 0.01})";
  const std::string msg = error_message(text, ErrorCode::ValidationError);
  EXPECT_EQ(msg.rfind("ValidationError: h:", 0), 0u) << msg;
  EXPECT_NE(msg.find("M = "), std::string::npos) << msg;
  EXPECT_NE(msg.find("prox_r = 1"), std::string::npos) << msg;
  // Recompute the inequality: M >= |f(x0)| = 4.5, so h * M >= 0.045; the
  // reachable box radius 2 * 4.5 * e^2 pushes M past 50.
  const ScenarioFile ok = parse_scenario_text(with_replacement(text, "\"h\": 0.01", "\"h\": 0.001"));
  EXPECT_GT(ok.scenario.speed_bound(), 50.0);
  EXPECT_GE(0.01 * ok.scenario.speed_bound(), 0.5 * 1.0);
  EXPECT_LT(0.001 * ok.scenario.speed_bound(), 0.5 * 1.0);
}

TEST(ParseScenario, SyntaxErrorReportsLine) {
  const std::string text = "{\n  \"set\": {\"kind\": \"whole_space\", \"dim\": 1},\n  \"x0\": [1.0,,]\n}";
  const std::string msg = error_message(text, ErrorCode::ParseError);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ParseScenario, SchemaErrorsNameTheField) {
  EXPECT_NE(error_message(with_replacement(kMinimal, "\"offset\": 0.0", "\"offset\": 0.0, \"extra\": 1"),
                          ErrorCode::ValidationError)
                .find("set.extra"),
            std::string::npos);
  EXPECT_NE(error_message(with_replacement(kMinimal, "\"h\": 0.001", "\"h\": 0.001, \"colour\": 1"),
                          ErrorCode::ValidationError)
                .find("colour"),
            std::string::npos);
  EXPECT_NE(error_message(with_replacement(kMinimal, "\"T\": 2.0", "\"T\": \"two\""), ErrorCode::ValidationError)
                .find("T: expected a number"),
            std::string::npos);
  EXPECT_NE(error_message(with_replacement(kMinimal, "\"h\": 0.001", "\"h\": 0.001, \"checks\": [\"nope\"]"),
                          ErrorCode::ValidationError)
                .find("unknown check"),
            std::string::npos);
  EXPECT_NE(error_message(with_replacement(kMinimal, "\"value\": [-1.0]", "\"value\": [-1.0, 2.0]"),
                          ErrorCode::ValidationError)
                .find("field"),
            std::string::npos);
  EXPECT_NE(error_message(with_replacement(kMinimal, "half_space", "hexagon"), ErrorCode::ValidationError)
                .find("set.kind"),
            std::string::npos);
  EXPECT_NE(error_message(with_replacement(kMinimal, "\"T\": 2.0,", ""), ErrorCode::ValidationError).find("T: missing"),
            std::string::npos);
}

TEST(ParseScenario, MissingFile) {
  EXPECT_SWEEP_ERROR(parse_scenario("/nonexistent/scenario.json"), ErrorCode::ParseError);
}

TEST(ParseScenario, ChecksAndOverrides) {
  const std::string text = with_replacement(
      kMinimal, "\"h\": 0.001",
      "\"h\": 0.001, \"checks\": [\"liminf_lower\", {\"name\": \"right_continuity_v\", \"slack\": 0.1, "
      "\"constant\": 3, \"window\": 4}], \"output\": {\"report\": \"r.json\"}, \"seed\": 12");
  const ScenarioFile f = parse_scenario_text(text);
  ASSERT_EQ(f.checks.size(), 2u);
  EXPECT_EQ(f.checks[0].name, "liminf_lower");
  EXPECT_EQ(f.checks[1].slack, 0.1);
  EXPECT_EQ(f.checks[1].constant, 3.0);
  EXPECT_EQ(f.checks[1].window, 4u);
  EXPECT_FALSE(f.checks[1].abs_tol.has_value());
  EXPECT_EQ(f.output.report, "r.json");
  EXPECT_EQ(f.output.trajectory, "trajectory.csv");
  EXPECT_EQ(f.seed, 12u);
}

TEST(ParseScenario, InfiniteBoxBounds) {
  const std::string text = R"({
    "set": {"kind": "box", "lower": [0.0, "-inf"], "upper": ["inf", 1.0]},
    "field": {"kind": "constant", "value": [1.0, 1.0]},
    "x0": [0.0, 0.0], "T": 1.0, "h": 0.5})";
  const ScenarioFile f = parse_scenario_text(text);
  const Box* b = f.scenario.set().as<Box>();
  ASSERT_NE(b, nullptr);
  EXPECT_TRUE(std::isinf(b->upper[0]));
  EXPECT_TRUE(std::isinf(b->lower[1]) && b->lower[1] < 0);
}

TEST(ParseScenario, ProxOverride) {
  const std::string text = R"({
    "set": {"kind": "ball_complement", "center": [0.0, 0.0], "radius": 2.0, "prox_r": 1.5},
    "field": {"kind": "constant", "value": [1.0, 0.0]},
    "x0": [3.0, 0.0], "T": 1.0, "h": 0.001})";
  EXPECT_EQ(parse_scenario_text(text).scenario.set().prox_r(), 1.5);
  EXPECT_NE(error_message(with_replacement(text, "1.5}", "2.5}"), ErrorCode::ValidationError).find("set.prox_r"),
            std::string::npos);
}

TEST(ScenarioJson, RoundTripIsIdentical) {
  const std::vector<std::string> texts = {
      kMinimal,
      R"({"set": {"kind": "polytope", "faces": [{"normal": [-1.0, 0.0], "offset": 0.0},
            {"normal": [0.0, -1.0], "offset": 0.0}, {"normal": [1.0, 1.0], "offset": 2.0}]},
          "field": {"kind": "neg_gradient", "potential": {"kind": "quadratic", "q": [[1.0, 0.2], [0.2, 3.0]],
            "linear": [-3.0, -1.0], "constant": 0.3}},
          "x0": [0.5, 0.5], "T": 1.0, "h": 0.01, "checks": [{"name": "energy_identity", "slack": 0.0}],
          "seed": 77})",
      R"({"set": {"kind": "disjoint_union", "prox_r": 0.25, "members": [
            {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0},
            {"kind": "box", "lower": [2.0, "-inf"], "upper": [3.0, "inf"]}]},
          "field": {"kind": "linear", "a": [[0.0, 1.0], [-1.0, 0.0]], "b": [0.1, 0.0], "lipschitz_k": 1.5},
          "x0": [0.0, 0.0], "T": 0.5, "h": 0.001, "output": {"trajectory": "t.csv", "report": "r.json"}})",
      R"({"set": {"kind": "whole_space", "dim": 2},
          "field": {"kind": "neg_gradient", "potential": {"kind": "separable_polynomial",
            "coefficients": [[0.0, 0.0, -0.5, 0.0, 0.25], [0.0, 0.1, 1.0]]}},
          "x0": [0.3, -0.1], "T": 0.25, "h": 0.001})",
  };
  for (const auto& t : texts) {
    const ScenarioFile a = parse_scenario_text(t);
    const std::string dumped = to_json(a).dump();
    const ScenarioFile b = parse_scenario_text(dumped);
    EXPECT_TRUE(a == b) << dumped;
    EXPECT_EQ(to_json(b).dump(), dumped);
    EXPECT_EQ(scenario_digest(a.scenario), scenario_digest(b.scenario));
  }
}

TEST(ScenarioJson, RandomizedRoundTrip) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double lo = u(rng);
    const double hi = lo + 0.1 + std::abs(u(rng));
    const Vector x0 = make_vector({lo + 0.5 * (hi - lo)});
    const Scenario s = Scenario::create(ProxSet::box(make_vector({lo}), make_vector({hi})),
                                        Field::constant(make_vector({u(rng)})), x0, 1.0, 0.01);
    const ScenarioFile f{s, {}, {}, static_cast<std::uint64_t>(i)};
    EXPECT_TRUE(parse_scenario_text(to_json(f).dump()) == f);
  }
}

TEST(ScenarioDigest, SensitiveToContent) {
  const ScenarioFile a = parse_scenario_text(kMinimal);
  const ScenarioFile b = parse_scenario_text(with_replacement(kMinimal, "\"x0\": [1.0]", "\"x0\": [1.5]"));
  EXPECT_EQ(scenario_digest(a.scenario).size(), 16u);
  EXPECT_NE(scenario_digest(a.scenario), scenario_digest(b.scenario));
  EXPECT_EQ(scenario_digest(a.scenario), scenario_digest(parse_scenario_text(kMinimal).scenario));
}

TEST(ApplicableChecks, DependOnFieldKind) {
  const auto plain = applicable_checks(parse_scenario_text(kMinimal).scenario);
  EXPECT_EQ(std::count(plain.begin(), plain.end(), "energy_identity"), 0);
  const std::string grad = R"({"set": {"kind": "box", "lower": [1.0], "upper": [2.0]},
      "field": {"kind": "neg_gradient", "potential": {"kind": "quadratic", "q": [[1.0]]}},
      "x0": [2.0], "T": 1.0, "h": 0.001})";
  const auto g = applicable_checks(parse_scenario_text(grad).scenario);
  EXPECT_EQ(std::count(g.begin(), g.end(), "energy_identity"), 1);
  EXPECT_EQ(std::count(g.begin(), g.end(), "convex_minimization"), 1);
  EXPECT_EQ(g.size(), known_checks().size());
}

}  // namespace
}  // namespace sweep::cli
