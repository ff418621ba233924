#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dualgeo::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kPairFailed = 3,
};

/// Runs the dualgeo command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualgeo::cli
