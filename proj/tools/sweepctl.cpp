#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sweep/cli/runner.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sweep::cli;
  CLI::App app{"Catching-up integrator and bound verifier for perturbed sweeping processes"};
  app.require_subcommand(1);

  RunOptions opts;
  std::string checks;
  std::uint64_t seed = 0;
  std::string param;
  std::vector<double> values;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opts.scenario, "Scenario file")->required();
    sub->add_option("--out-dir", opts.out_dir, "Output directory");
    sub->add_option("--checks", checks, "Comma-separated subset of checks");
    sub->add_option("--seed", seed, "Seed for sampled certifications");
    sub->add_flag("--quiet", opts.quiet, "Suppress the summary on stdout");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Integrate one scenario and verify it");
  common(run_cmd);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a scenario over a list of parameter values");
  common(sweep_cmd);
  sweep_cmd->add_option("--param", param, "h, T or x0[i]")->required();
  sweep_cmd->add_option("--values", values, "Values, comma separated")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  CLI::App* active = run_cmd->parsed() ? run_cmd : sweep_cmd;
  if (active->count("--checks") > 0) opts.checks = split_list(checks);
  if (active->count("--seed") > 0) opts.seed = seed;

  if (run_cmd->parsed()) return run(opts, std::cout, std::cerr);
  return sweep::cli::sweep(opts, param, values, std::cout, std::cerr);
}
