#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hodgeflow/cli/commands.hpp"
#include "hodgeflow/cli/config.hpp"

int main(int argc, char **argv) {
  using namespace hodgeflow::cli;

  CLI::App app{"Hyperplane intersections, affine distributions and conservative/dissipative "
               "vector fields"};
  app.require_subcommand(1);

  std::string builtins;
  for (const auto &name : builtin_scenario_names())
    builtins += (builtins.empty() ? "" : ", ") + name;

  SolveOptions solve;
  auto *solve_cmd = app.add_subcommand("solve", "Solve a hyperplane-intersection system");
  solve_cmd->add_option("--input", solve.input, "System document")->required();
  solve_cmd->add_option("--output", solve.output, "Write the result here instead of stdout");
  solve_cmd->add_option("--tol", solve.tol, "Residual tolerance")->capture_default_str();

  GeneratorsOptions gens;
  auto *gens_cmd =
      app.add_subcommand("generators", "Tabulate X0 and the generators at sample points");
  gens_cmd->add_option("--scenario", gens.scenario, "Built-in (" + builtins + ") or path")
      ->required();
  gens_cmd->add_option("--points", gens.points, "Points document")->required();
  gens_cmd->add_option("--output", gens.output, "Write the table here instead of stdout");

  IntegrateOptions integ;
  auto *integ_cmd = app.add_subcommand("integrate", "Integrate a scenario to a CSV trajectory");
  integ_cmd->add_option("--scenario", integ.scenario, "Built-in (" + builtins + ") or path")
      ->required();
  integ_cmd->add_option("--output", integ.output, "Trajectory CSV")->required();

  CheckOptions check;
  double check_tol = 0;
  auto *check_cmd = app.add_subcommand("check", "Audit a trajectory CSV against its scenario");
  check_cmd->add_option("--input", check.input, "Trajectory CSV")->required();
  check_cmd->add_option("--scenario", check.scenario, "Built-in (" + builtins + ") or path")
      ->required();
  auto *tol_opt = check_cmd->add_option("--tol", check_tol, "Override the scenario tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  if (*solve_cmd)
    return cmd_solve(solve, std::cout, std::cerr);
  if (*gens_cmd)
    return cmd_generators(gens, std::cout, std::cerr);
  if (*integ_cmd)
    return cmd_integrate(integ, std::cout, std::cerr);
  if (tol_opt->count())
    check.tol = check_tol;
  return cmd_check(check, std::cout, std::cerr);
}
