#pragma once

#include <iosfwd>

namespace crnsim::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kUsageError = 2,
};

/// Entry point behind `main`; writes CSV bodies either to files or to `out`.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace crnsim::cli
