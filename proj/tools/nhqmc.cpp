// Command-line front end: plan | run | validate | reproduce-fig3.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nhqmc/commands.hpp"
#include "nhqmc/propagate.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo LCHS estimator for non-Hermitian and open-system dynamics"};
  app.require_subcommand(1);

  nhqmc::CommandOptions options;
  std::string config;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string output;
  std::uint64_t shots = 0;
  std::string method;

  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", config, "run description (YAML)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--workers", workers, "worker threads");
    cmd->add_option("--output", output, "output directory");
    cmd->add_flag("--svg", options.svg, "also write results.svg");
    cmd->add_option("--shots", shots, "shot-noise readout with M shots per draw");
    cmd->add_option("--method", method, "exact|trotter1|qdrift|continuous[:mc|:quadrature]");
  };
  auto* plan = app.add_subcommand("plan", "print kernel table, sample plan and denominator bounds");
  auto* run = app.add_subcommand("run", "estimate over the configured time grid");
  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  auto* fig3 = app.add_subcommand("reproduce-fig3", "four-qubit damped Ising preset");
  add_common(plan, true);
  add_common(run, true);
  add_common(validate, false);
  add_common(fig3, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nhqmc::kExitConfig;
  }

  const auto given = [&](const char* name) {
    return app.get_subcommands().front()->count(name) > 0;
  };
  if (given("--config")) options.config = config;
  if (given("--seed")) options.seed = seed;
  if (given("--workers")) options.workers = workers;
  if (given("--output")) options.output = output;
  if (given("--shots")) options.shots = shots;
  if (given("--method")) options.method = method;

  if (plan->parsed()) return nhqmc::cmd_plan(options, std::cout, std::cerr);
  if (run->parsed()) return nhqmc::cmd_run(options, std::cout, std::cerr);
  if (validate->parsed()) return nhqmc::cmd_validate(options, std::cout, std::cerr);
  return nhqmc::cmd_reproduce_fig3(options, std::cout, std::cerr);
}
