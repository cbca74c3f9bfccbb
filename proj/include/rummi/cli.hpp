#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rummi::cli {

/// Exit codes of the `rummi` tool.
enum ExitCode : int {
  kOk = 0,
  kDomainFailure = 1,
  kParseError = 2,
  kCrossReference = 3,
};

/// Entry point of the `rummi` tool. `args` excludes the program name.
/// Data goes to `out`; summaries and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rummi::cli
