#pragma once

#include <filesystem>
#include <ostream>

namespace hkdelay {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // a verification check or a consensus requirement failed
  kExitConfig = 2,
  kExitIntegration = 3,
  kExitUnsupported = 4,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  unsigned jobs = 1;  // 0: one per hardware thread
  bool quiet = false;
};

/// trajectory CSV + summary JSON.
int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
/// report CSV + certificate JSON; nonzero when any check fails.
int cmd_verify(const CommandOptions& opt, std::ostream& out, std::ostream& err);
/// One CSV row per grid cell; the exit code is the worst cell's.
int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err);
/// Mean-field table CSV + per-run summary JSON.
int cmd_meanfield(const CommandOptions& opt, std::ostream& out, std::ostream& err);

/// Argument parsing and dispatch for the `hkdelay` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hkdelay
