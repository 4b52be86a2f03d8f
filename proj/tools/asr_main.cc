#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "asr/cli.h"

int main(int argc, char** argv) {
  CLI::App app{"Application-specific anycast routing: solve, sweep, simulate"};
  app.require_subcommand(1);

  std::string config;

  auto* validate = app.add_subcommand("validate", "Check a configuration file");
  validate->add_option("config", config, "Configuration file")->required();

  asr::cli::SolveArgs solve_args;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "Solve the configured instance once");
  solve->add_option("config", solve_args.config_path, "Configuration file")
      ->required();
  solve->add_option("--perturbation,-p", solve_args.perturbation,
                    "Named perturbation vector (default: baseline)");
  solve->add_option("--out,-o", solve_out, "Write the assignment as CSV");

  asr::cli::SimulateArgs sim_args;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run the tick simulation");
  simulate->add_option("config", sim_args.config_path, "Configuration file")
      ->required();
  simulate->add_option("--trace,-t", sim_args.traces, "Trace CSV file(s)");
  auto* seed_opt = simulate->add_option("--seed,-s", seed, "RNG seed override");
  simulate->add_option("--perturbation,-p", sim_args.perturbation,
                       "Named perturbation vector (default: baseline)");
  simulate->add_option("--out-dir,-o", sim_args.out_dir,
                       "Directory for CSV series and summary.txt");

  asr::cli::SensitivityArgs sweep_args;
  std::string sweep_out;
  auto* sensitivity = app.add_subcommand(
      "sensitivity", "Solve once per perturbation vector of a grid");
  sensitivity->add_option("config", sweep_args.config_path, "Configuration file")
      ->required();
  sensitivity
      ->add_option("--grid,-g", sweep_args.grid,
                   "';'-separated items: perturbation names, 'baseline' or "
                   "inline specs like 'load:0.9,delay:0.9'")
      ->required();
  sensitivity->add_option("--out,-o", sweep_out, "Write CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : asr::cli::kExitIo;
  }

  if (*validate) return asr::cli::RunValidate(config, std::cout, std::cerr);
  if (*solve) {
    if (!solve_out.empty()) solve_args.out_csv = solve_out;
    return asr::cli::RunSolve(solve_args, std::cout, std::cerr);
  }
  if (*simulate) {
    if (*seed_opt) sim_args.seed = seed;
    return asr::cli::RunSimulate(sim_args, std::cout, std::cerr);
  }
  if (!sweep_out.empty()) sweep_args.out_csv = sweep_out;
  return asr::cli::RunSensitivity(sweep_args, std::cout, std::cerr);
}
