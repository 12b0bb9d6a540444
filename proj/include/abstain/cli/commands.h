#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace abstain {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // runtime error
  kExitUsage = 2,    // bad flags or config
  kExitPartial = 3,  // some questions failed and --allow-partial was not given
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abstain
