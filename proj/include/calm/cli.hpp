#pragma once

#include <ostream>

namespace calm {

/// Process exit codes of the `calm` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumeric = 4,
  kExitGradcheck = 5,
};

/// Entry point of the `calm` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace calm
