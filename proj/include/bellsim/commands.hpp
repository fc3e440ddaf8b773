#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bellsim {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitNonConvergence = 3,
  kExitConfig = 4,
};

/// Entry point of the `bellsim` command line. Writes one JSON document to
/// `out` and diagnostics to `err`; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bellsim
