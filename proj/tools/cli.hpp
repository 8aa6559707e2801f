#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace latentgeo::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  // Results were written but a solver stopped before its tolerance.
  kNotConverged = 3,
};

/// Runs one command line (without the program name). Primary results go to
/// `out` when no --out file is given; error documents go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latentgeo::cli
