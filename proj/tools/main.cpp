#include <string>

#include "CLI11.hpp"
#include "turnpike/commands.hpp"

int main(int argc, char** argv) {
  using namespace turnpike::cli;

  CLI::App app{"trim primitives, velocity turnpikes, and optimal control of "
               "mechanical systems with symmetries"};
  app.set_version_flag("--version", std::string("turnpike ") + kToolVersion);
  app.require_subcommand(1);

  CommandOptions opts;
  auto add_common = [&opts](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--scenario", opts.scenario_path, "scenario file (key = value lines or JSON)")
        ->required();
    auto* out = cmd->add_option("--out", opts.out_dir, "output directory for the result bundle");
    if (needs_out) out->required();
    cmd->add_option("--nodes", opts.nodes, "override the scenario's interval count N");
    cmd->add_option("--tol", opts.tol, "override the solver KKT tolerance");
    cmd->add_option("--seed", opts.seed, "override the scenario's seed");
  };

  CLI::App* solve = app.add_subcommand("solve", "transcribe and solve the scenario");
  add_common(solve, true);

  CLI::App* analytic =
      app.add_subcommand("analytic", "closed-form point-mass solution with costate columns");
  add_common(analytic, true);

  CLI::App* sweep =
      app.add_subcommand("sweep", "solve across horizons and report turnpike diagnostics");
  add_common(sweep, true);
  sweep->add_option("--T-list", opts.T_list, "horizons to sweep")
      ->required()
      ->delimiter(',');

  CLI::App* check = app.add_subcommand("check", "derivative and symmetry self-checks");
  add_common(check, false);

  CLI::App* trims =
      app.add_subcommand("trims", "velocity steady states and the cost-optimal one");
  add_common(trims, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (solve->parsed()) return cmd_solve(opts);
  if (analytic->parsed()) return cmd_analytic(opts);
  if (sweep->parsed()) return cmd_sweep(opts);
  if (check->parsed()) return cmd_check(opts);
  return cmd_trims(opts);
}
