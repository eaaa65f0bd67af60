#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tlmp::cli {

enum ExitCode : int {
  kOk = 0,
  kInfeasible = 1,
  kBadInput = 2,
  kSolverFailure = 3,
  kExpectationMismatch = 4,
};

// Parses and runs one command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tlmp::cli
