// qosctl: channel experiments and state-space analysis from the command line.

#include "qosctl/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace qosctl::cli;

  CLI::App app{"Feedback bandwidth control simulator and state-space toolkit"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string scenario;
  std::uint64_t seed = 0;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario, "Scenario file")->required();
    cmd->add_option("--out", run_opts.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "Override the scenario's master seed");
    cmd->add_option("--set", run_opts.overrides, "Override a scenario value, e.g. controller.beta=1.2")
        ->allow_extra_args(false);
    cmd->add_option("--bins", run_opts.bins, "Histogram bins")->capture_default_str();
    cmd->add_option("--tail-threshold", run_opts.tail_threshold, "Utilization tail threshold")
        ->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "Simulate one scenario and write series, report and histogram");
  add_run_flags(run);
  auto* compare = app.add_subcommand("compare", "Run a scenario with control off and on and compare");
  add_run_flags(compare);

  std::string model_path;
  auto* analyze = app.add_subcommand("analyze", "Stability, controllability and observability of a model");
  analyze->add_option("model", model_path, "Model file")->required();

  std::string trajectory_path;
  std::string identify_out;
  auto* identify = app.add_subcommand("identify", "Least-squares fit of A and B to a trajectory");
  identify->add_option("trajectory", trajectory_path, "Trajectory CSV")->required();
  identify->add_option("--out", identify_out, "Write the model here instead of stdout");

  std::int64_t ticks = 100;
  std::uint64_t sim_seed = 1;
  std::string simulate_out;
  auto* simulate = app.add_subcommand("simulate", "Drive a model with random inputs and write the trajectory");
  simulate->add_option("model", model_path, "Model file")->required();
  simulate->add_option("--ticks", ticks, "Number of transitions")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", simulate_out, "Write the trajectory here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  if (run->parsed() || compare->parsed()) {
    if (run->count("--seed") > 0 || compare->count("--seed") > 0) run_opts.seed = seed;
  }
  if (*run) return cmd_run(scenario, run_opts, std::cout, std::cerr);
  if (*compare) return cmd_compare(scenario, run_opts, std::cout, std::cerr);
  if (*analyze) return cmd_analyze(model_path, std::cout, std::cerr);
  if (*identify) return cmd_identify(trajectory_path, identify_out, std::cout, std::cerr);
  if (*simulate) return cmd_simulate(model_path, ticks, sim_seed, simulate_out, std::cout, std::cerr);
  return kInputError;
}
