#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfo {

// Exit codes, one per error class.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitFormat = 4,
  kExitIo = 5,
  kExitDimension = 6,
  kExitNumeric = 7,
  kExitTerm = 8,
};

// Runs one CLI invocation in-process. `args` excludes the program name.
// Failures print {"error": {"kind": ..., "message": ...}} on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfo
