#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace unarysim {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitDeviation = 2,
  kExitIo = 3,
};

/// Runs the command line `args` (args[0] is the program name). All report
/// output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unarysim
