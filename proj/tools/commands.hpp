#pragma once

// Command-line front end. run() parses argv, dispatches to a verb and maps
// failures to exit codes; main() only forwards to it so tests can drive the
// CLI in-process.

#include <iosfwd>

namespace shockgp::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kMalformed = 2,
  kValidation = 3,
  kTraining = 4,
  kSchema = 5,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shockgp::cli
