#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nsp::cli {

// Process exit codes of the `nsp` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,          // unexpected internal error
  kExitConfig = 2,           // bad flags, config file, or argument values
  kExitBadDataset = 3,       // `features`: dataset missing or corrupt
  kExitDivergence = 4,       // training produced a non-finite loss or gradient
  kExitMissingArtifact = 5,  // upstream artifact (features, reducer, model) missing or unreadable
};

// Runs one `nsp` invocation in-process. `args` excludes the program name.
// Written file paths go to `out`, one per line; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nsp::cli
