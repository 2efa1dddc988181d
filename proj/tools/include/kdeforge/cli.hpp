#pragma once

#include <iosfwd>

namespace kdeforge::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kConfigError = 2,
  kDataError = 3,
};

/// Parses and runs one command line. Machine-readable output goes to the
/// --output file (or `out` when absent); the human summary line always goes
/// to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kdeforge::cli
