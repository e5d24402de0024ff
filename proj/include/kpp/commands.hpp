#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpp/config.hpp"

namespace kpp {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailed = 1,  // validation failed or a solver gave up
  kExitUsage = 2,   // bad flags, bad config, unusable inputs
};

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir;
  int workers = 1;
  bool svg = false;
};

/// Reaction and diffusion checks; prints one line per check.
int cmd_validate(const RunConfig& config, std::ostream& log);

/// speed.txt, z.csv, profile.csv, report.json (+ z.svg, profile.svg).
int cmd_wave(const CommandContext& ctx, std::ostream& log);

/// front.csv, snapshots.csv, report.json (+ front.svg).
int cmd_simulate(const CommandContext& ctx, std::ostream& log);

/// sweep.csv and report.json: one front simulation per epsilon.
int cmd_sweep(const CommandContext& ctx, std::ostream& log);

/// regularization.csv and report.json: c* of the regularized law along the
/// alpha ladder.
int cmd_regularization_study(const CommandContext& ctx, std::ostream& log);

/// Full command line: `kppwave <subcommand> --config PATH [--out DIR]
/// [--workers N] [--svg]`. Errors are reported on `err`; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& log,
            std::ostream& err);

}  // namespace kpp
