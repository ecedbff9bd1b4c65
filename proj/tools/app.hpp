#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cdii::cli {

/// Process exit codes. Command-line parse errors are reported as config errors.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSolverError = 3,
  kNotConverged = 4,
};

/// Runs one subcommand; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdii::cli
