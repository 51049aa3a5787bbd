#include "sweep/cli/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <thread>

#include "sweep/prox_regularity.hpp"

namespace sweep::cli {

using nlohmann::json;

namespace {

constexpr std::size_t kProxPairs = 50;
constexpr std::size_t kProxSamples = 200;
constexpr std::size_t kConvexSamples = 400;
constexpr std::size_t kRightDerivativeTimes = 10;

CheckOptions options_for(const CheckSpec& spec) {
  CheckOptions o;
  if (spec.slack) o.slack = *spec.slack;
  if (spec.abs_tol) o.abs_tol = *spec.abs_tol;
  if (spec.constant) o.constant = *spec.constant;
  if (spec.window) o.window = *spec.window;
  if (spec.stop_tol) o.stop_tol = *spec.stop_tol;
  return o;
}

// Per-check stream so adding or removing a check leaves the others' draws unchanged.
std::mt19937_64 rng_for(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return std::mt19937_64(seed ^ h);
}

double excess(const BoundCheck& c) { return c.measured - (c.bound * (1.0 + c.slack) + c.abs_tol); }

BoundCheck failed(const std::string& name, const CheckOptions& o, const std::string& why) {
  BoundCheck c{.name = name, .slack = o.slack, .abs_tol = o.abs_tol};
  c.measured = std::numeric_limits<double>::quiet_NaN();
  c.pass = false;
  c.note = why;
  return c;
}

double probe_norm(const ProxSet& set) {
  return std::isinf(set.prox_r()) ? kConvexProbeScale : 0.99 * set.prox_r();
}

// Nearby admissible start for the two-solution comparison.
Vector perturbed_start(const Scenario& s, std::mt19937_64& rng) {
  const ProxSet& set = s.set();
  const Vector& x0 = s.x0();
  std::normal_distribution<double> gauss(0.0, 1.0);
  double scale = 0.05 * (1.0 + x0.norm());
  if (!std::isinf(set.prox_r())) scale = std::min(scale, 0.25 * set.prox_r());
  for (int attempt = 0; attempt < 64; ++attempt) {
    Vector d(x0.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = gauss(rng);
    const Vector cand = x0 + scale * d / std::max(d.norm(), 1e-12);
    if (contains(set, cand)) return cand;
    const NearestPointProfile prof = nearest_point_profile(set, cand);
    if (prof.best < 0.5 * set.prox_r() && prof.runner_up - prof.best > 1e-6) return project(set, cand);
  }
  return x0;
}

BoundCheck run_two_solution(const ScenarioFile& f, const Trajectory& traj, const CheckOptions& o) {
  auto rng = rng_for(f.seed, "two_solution_bound");
  const Scenario& s = f.scenario;
  const Vector y0 = perturbed_start(s, rng);
  const Trajectory other = integrate_from(s.set(), s.field(), y0, 0.0, s.step(), s.num_steps());
  BoundCheck c = check_two_solution_bound(traj, other, s.set().prox_r(), o);
  c.note = "y0 = " + format_vector(y0);
  return c;
}

BoundCheck run_right_derivative(const Trajectory& traj, const CheckOptions& o) {
  const std::vector<std::size_t> events = active_set_events(traj);
  const auto near_event = [&](std::size_t i) {
    return std::any_of(events.begin(), events.end(), [&](std::size_t e) { return e >= i && e < i + 8; });
  };
  if (traj.size() < 10) return failed("right_derivative", o, "trajectory shorter than 8 steps");
  const std::size_t last = traj.size() - 9;
  std::vector<std::size_t> chosen;
  for (std::size_t j = 0; j < kRightDerivativeTimes; ++j) {
    std::size_t i = last * j / (kRightDerivativeTimes - 1);
    const std::size_t stop = last * (j + 1) / (kRightDerivativeTimes - 1);
    while (i <= std::min(stop, last) && near_event(i)) ++i;
    if (i <= last && !near_event(i) && (chosen.empty() || chosen.back() != i)) chosen.push_back(i);
  }
  if (chosen.empty()) return failed("right_derivative", o, "no grid time clear of active-set changes");

  BoundCheck worst;
  bool have = false;
  bool monotone = true;
  for (std::size_t i : chosen) {
    BoundCheck c = check_right_derivative(traj, traj.set, traj.field, traj.times[i], o);
    monotone = monotone && c.side_condition;
    if (!have || excess(c) > excess(worst)) {
      worst = c;
      worst.note = "worst at t = " + std::to_string(traj.times[i]);
      have = true;
    }
  }
  worst.side_condition = monotone;
  worst.events = events;
  worst.pass = worst.recompute();
  return worst;
}

struct NormalPair {
  Vector x;
  Vector xi;
};

std::vector<NormalPair> normal_pairs(const ProxSet& set, std::mt19937_64& rng, std::size_t n) {
  const SampleBox box = default_sample_box(set);
  std::vector<NormalPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector x = sample_boundary_point(set, box, rng);
    Vector xi = sample_normal(set, x, probe_norm(set), rng);
    out.push_back({std::move(x), std::move(xi)});
  }
  return out;
}

BoundCheck prox_check(const std::string& name, const ScenarioFile& f, const CheckOptions& o_in,
                      bool abs_tol_given) {
  CheckOptions o = o_in;
  if (!abs_tol_given) o.abs_tol = kCheckTol;
  const ProxSet& set = f.scenario.set();
  auto rng = rng_for(f.seed, name);
  const std::vector<NormalPair> pairs = normal_pairs(set, rng, kProxPairs);

  BoundCheck c{.name = name, .bound = 0.0, .slack = o.slack, .abs_tol = o.abs_tol};
  c.measured = -kInfinity;
  if (name == "projection_identity") {
    for (const auto& p : pairs) c.measured = std::max(c.measured, (project(set, p.x + p.xi) - p.x).norm());
  } else if (name == "prox_inequality") {
    const SampleBox box = default_sample_box(set);
    std::vector<Vector> ys;
    for (std::size_t i = 0; i < kProxSamples; ++i) ys.push_back(sample_point(set, box, rng));
    for (const auto& p : pairs) c.measured = std::max(c.measured, prox_inequality_residual(set, p.x, p.xi, ys));
  } else {
    for (std::size_t i = 0; i + 1 < pairs.size(); i += 2) {
      const auto& a = pairs[i];
      const auto& b = pairs[i + 1];
      c.measured = std::max(c.measured, -hypo_monotonicity_gap(set, a.x, b.x, a.xi, b.xi));
    }
  }
  c.pass = c.recompute();
  return c;
}

BoundCheck run_convex_minimization(const ScenarioFile& f, const Trajectory& traj, const CheckOptions& o) {
  const Potential* p = f.scenario.field().potential();
  if (!p) throw Error(ErrorCode::WrongFieldKind, "convex_minimization needs a gradient field");
  const ProxSet& set = f.scenario.set();
  auto rng = rng_for(f.seed, "convex_minimization");
  const SampleBox box = default_sample_box(set);
  std::vector<Vector> ys;
  for (std::size_t i = 0; i < kConvexSamples; ++i) {
    ys.push_back(i % 2 ? sample_point(set, box, rng) : sample_boundary_point(set, box, rng));
  }
  return convex_minimization_check(traj, *p, set, ys, o);
}

BoundCheck evaluate(const CheckSpec& spec, const ScenarioFile& f, const Trajectory& traj) {
  const CheckOptions o = options_for(spec);
  const std::string& n = spec.name;
  try {
    const Potential* p = f.scenario.field().potential();
    const auto need_potential = [&]() -> const Potential& {
      if (!p) throw Error(ErrorCode::WrongFieldKind, n + " needs a gradient field");
      return *p;
    };
    if (n == "velocity_field_bound") return check_velocity_field_bound(traj, o);
    if (n == "two_solution_bound") return run_two_solution(f, traj, o);
    if (n == "velocity_decay_bound") return check_velocity_decay_bound(traj, traj.set.prox_r(), o);
    if (n == "right_derivative") return run_right_derivative(traj, o);
    if (n == "right_continuity_v") return check_right_continuity_v(traj, o);
    if (n == "liminf_lower") return check_liminf_lower(traj, o);
    if (n == "difference_quotient_limsup") return check_difference_quotient_limsup(traj, o);
    if (n == "energy_identity") return energy_identity_residual(traj, need_potential(), o);
    if (n == "dissipation_integral") return dissipation_integral(traj, need_potential(), o);
    if (n == "convex_minimization") return run_convex_minimization(f, traj, o);
    return prox_check(n, f, o, spec.abs_tol.has_value());
  } catch (const Error& e) {
    return failed(n, o, e.what());
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(fmt17(v)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IntegrationFailure, "cannot write " + path.string());
  out << text;
}

void write_outputs(const ScenarioFile& f, const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_trajectory_csv(r.trajectory, dir / f.output.trajectory);
  write_text(dir / f.output.report, report_to_json(r.report).dump(2) + "\n");
}

void print_report(const VerificationReport& report, std::ostream& out) {
  for (const auto& c : report.checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%-28s measured=%-12.4g bound=%-12.4g %s%s\n", c.name.c_str(),
                  c.measured, c.bound, c.pass ? "PASS" : "FAIL", c.informational ? " (informational)" : "");
    out << line;
    if (!c.pass && !c.note.empty()) out << "    " << c.note << "\n";
  }
  out << (report.overall_pass() ? "overall: PASS\n" : "overall: FAIL\n");
}

double max_residual(const VerificationReport& report) {
  double m = -kInfinity;
  for (const auto& c : report.checks) {
    if (!c.informational) m = std::max(m, c.measured);
  }
  return m;
}

}  // namespace

RunResult execute(const ScenarioFile& file) {
  RunResult r{integrate(file.scenario), {}};
  r.report.scenario_digest = scenario_digest(file.scenario);
  std::vector<CheckSpec> plan = file.checks;
  if (plan.empty()) {
    for (const auto& n : applicable_checks(file.scenario)) plan.push_back({.name = n});
  }
  for (const auto& spec : plan) r.report.checks.push_back(evaluate(spec, file, r.trajectory));
  std::sort(r.report.checks.begin(), r.report.checks.end(),
            [](const BoundCheck& a, const BoundCheck& b) { return a.name < b.name; });
  return r;
}

ScenarioFile apply_overrides(ScenarioFile file, const RunOptions& opts) {
  if (opts.seed) file.seed = *opts.seed;
  if (opts.checks) {
    std::vector<CheckSpec> plan;
    const auto& names = known_checks();
    for (const auto& n : *opts.checks) {
      if (std::find(names.begin(), names.end(), n) == names.end()) {
        throw Error(ErrorCode::ValidationError, "--checks: unknown check '" + n + "'");
      }
      // Keep per-check overrides from the file for checks it already lists.
      auto it = std::find_if(file.checks.begin(), file.checks.end(),
                             [&](const CheckSpec& c) { return c.name == n; });
      plan.push_back(it != file.checks.end() ? *it : CheckSpec{.name = n});
    }
    file.checks = std::move(plan);
  }
  return file;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  const Eigen::Index n = traj.set.dim();
  std::string text = "t";
  for (Eigen::Index i = 0; i < n; ++i) text += ",x_" + std::to_string(i);
  for (Eigen::Index i = 0; i < n; ++i) text += ",v_" + std::to_string(i);
  text += ",active_set_size\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    text += fmt17(traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) text += "," + fmt17(traj.states[k][i]);
    for (Eigen::Index i = 0; i < n; ++i) text += "," + fmt17(traj.right_velocities[k][i]);
    text += "," + std::to_string(traj.active_sets[k].size()) + "\n";
  }
  write_text(path, text);
}

json report_to_json(const VerificationReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    json cj = {{"name", c.name},
               {"measured", number_or_null(c.measured)},
               {"bound", number_or_null(c.bound)},
               {"slack", c.slack},
               {"abs_tol", c.abs_tol},
               {"pass", c.pass},
               {"side_condition", c.side_condition},
               {"informational", c.informational},
               {"events", c.events.size()}};
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(cj);
  }
  return {{"scenario_digest", report.scenario_digest},
          {"overall_pass", report.overall_pass()},
          {"checks", checks}};
}

int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioFile file = apply_overrides(parse_scenario(opts.scenario), opts);
    const RunResult r = execute(file);
    write_outputs(file, r, opts.out_dir);
    if (!opts.quiet) print_report(r.report, out);
    return r.report.overall_pass() ? kExitPass : kExitCheckFailure;
  } catch (const Error& e) {
    err << "sweepctl: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "sweepctl: " << e.what() << "\n";
  }
  return kExitError;
}

SweepParam parse_sweep_param(const std::string& text) {
  if (text == "h") return {SweepParam::Which::Step, 0};
  if (text == "T") return {SweepParam::Which::Horizon, 0};
  if (text.size() > 4 && text.rfind("x0[", 0) == 0 && text.back() == ']') {
    const std::string digits = text.substr(3, text.size() - 4);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return {SweepParam::Which::X0, static_cast<Eigen::Index>(std::stoll(digits))};
    }
  }
  throw Error(ErrorCode::ValidationError, "--param: expected h, T or x0[i], got '" + text + "'");
}

int sweep(const RunOptions& opts, const std::string& param, const std::vector<double>& values,
          std::ostream& out, std::ostream& err) {
  std::optional<ScenarioFile> parsed;
  SweepParam which;
  try {
    which = parse_sweep_param(param);
    if (values.empty()) throw Error(ErrorCode::ValidationError, "--values: empty list");
    parsed = apply_overrides(parse_scenario(opts.scenario), opts);
    if (which.which == SweepParam::Which::X0 && which.index >= parsed->scenario.x0().size()) {
      throw Error(ErrorCode::ValidationError, "--param: " + param + " exceeds the dimension");
    }
  } catch (const std::exception& e) {
    err << "sweepctl: " << e.what() << "\n";
    return kExitError;
  }
  const ScenarioFile& base = *parsed;

  struct Outcome {
    bool pass = false;
    double residual = std::numeric_limits<double>::quiet_NaN();
    std::string status;
  };
  std::vector<Outcome> outcomes(values.size());
  const auto variant_dir = [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "variant_%03zu", i);
    return opts.out_dir / name;
  };
  const auto run_variant = [&](std::size_t i) {
    Outcome& o = outcomes[i];
    try {
      ScenarioFile v = base;
      switch (which.which) {
        case SweepParam::Which::Step:
          v.scenario = v.scenario.with_step(values[i]);
          break;
        case SweepParam::Which::Horizon:
          v.scenario = v.scenario.with_horizon(values[i]);
          break;
        case SweepParam::Which::X0: {
          Vector x0 = v.scenario.x0();
          x0[which.index] = values[i];
          v.scenario = v.scenario.with_x0(std::move(x0));
          break;
        }
      }
      const RunResult r = execute(v);
      write_outputs(v, r, variant_dir(i));
      o.pass = r.report.overall_pass();
      o.residual = max_residual(r.report);
      o.status = o.pass ? "ok" : "check_failure";
    } catch (const std::exception& e) {
      o.status = std::string("error: ") + e.what();
    }
  };

  // Each variant writes only its own slot and directory.
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::min<std::size_t>(values.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < values.size(); i = next++) run_variant(i);
    });
  }
  for (auto& t : pool) t.join();

  std::string table = "variant,value,overall_pass,max_residual,status\n";
  bool all_pass = true;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Outcome& o = outcomes[i];
    all_pass = all_pass && o.pass;
    std::string status = o.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    table += std::to_string(i) + "," + fmt17(values[i]) + "," + (o.pass ? "true" : "false") + "," +
             fmt17(o.residual) + "," + status + "\n";
  }
  try {
    std::filesystem::create_directories(opts.out_dir);
    write_text(opts.out_dir / "sweep_summary.csv", table);
  } catch (const std::exception& e) {
    err << "sweepctl: " << e.what() << "\n";
    return kExitError;
  }
  if (!opts.quiet) out << table;
  for (const auto& o : outcomes) {
    if (o.status.rfind("error", 0) == 0) err << "sweepctl: variant failed: " << o.status << "\n";
  }
  return all_pass ? kExitPass : kExitCheckFailure;
}

}  // namespace sweep::cli
