#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vpfix::tools {

enum ExitCode : int {
  kExitOk = 0,
  /// A check ran to completion and failed (grad-check).
  kExitCheckFailed = 1,
  kExitIo = 2,
  kExitValidation = 3,
  kExitInternal = 4,
};

/// Runs the `vpfix` command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vpfix::tools
