#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pawpulse::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  /// Bad flags, configuration, rule files or unusable calibration data.
  kExitUsage = 2,
  /// Malformed or empty input data, or a replay mismatch.
  kExitData = 3,
  kExitIo = 4,
};

/// Runs one command line. `args` excludes the program name. Binary output
/// (wire dumps) goes to `out` when no output path is given.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace pawpulse::cli
