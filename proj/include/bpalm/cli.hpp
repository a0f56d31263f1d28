#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bpalm::cli {

/// Exit codes of the `bpalm` tool.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,
  kNumericError = 3,
  kCheckFailed = 4,  // `check` found a relative-smoothness violation
};

/// Runs the tool with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bpalm::cli
