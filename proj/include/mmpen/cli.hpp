#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmpen {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitConvergence = 3 };

/// Runs one command line (args[0] is the program name) and returns the exit
/// code. Subcommands: fit, path, cv, predict, kkt, simulate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmpen
