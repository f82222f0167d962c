#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nhqmc/config.hpp"
#include "nhqmc/report.hpp"

namespace nhqmc {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitValidation = 3,
  kExitNumerical = 4,
};

/// Command-line overrides applied on top of a configuration.
struct CommandOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> output;
  std::optional<std::uint64_t> shots;
  std::optional<std::string> method;
  bool svg = false;
};

void apply_overrides(RunConfig& cfg, const CommandOptions& options);

/// Kernel table, sampling plan and denominator bounds as plain text.
std::string plan_report(const RunConfig& cfg);

/// One row per time point per method. Progress notes go to `log`.
std::vector<ResultRow> run_rows(const RunConfig& cfg, std::ostream& log);

int cmd_plan(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_reproduce_fig3(const CommandOptions& options, std::ostream& out,
                       std::ostream& err);

}  // namespace nhqmc
