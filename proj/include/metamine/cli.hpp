#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metamine::cli {

enum ExitCode : int { kSuccess = 0, kValidationError = 1, kRuntimeFailure = 2 };

/// Entry point for the `metamine` tool; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metamine::cli
