#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace granflow::cli {

/// Process exit codes.
enum ExitCode : int
{
  kSuccess = 0,
  kError = 1,
  kConditionFailure = 2,
};

/// Runs one `granflow` invocation. argv[0] is the program name. The human
/// report goes to `out`, diagnostics to `err`; CSV data goes to --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace granflow::cli
