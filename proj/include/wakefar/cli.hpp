#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wakefar {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,   // numerical failure, I/O error, failed verification
  kExitFloor = 2,     // solve reached a least-squares floor
  kExitUsage = 3,     // invalid configuration or usage
};

/// Command-line entry point: args[0] is the program name. Results go to
/// `out` (a JSON summary line last), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wakefar
