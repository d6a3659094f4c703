#pragma once

#include <ostream>

namespace epchain {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitConfig = 3 };

// Entry point of the epchain command line; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epchain
