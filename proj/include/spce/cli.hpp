#pragma once

#include <string>
#include <vector>

namespace spce::cli {

/// Dispatches one CLI invocation (args exclude the program name).
/// Exit codes: 0 success, 2 configuration error, 3 data error.
int run_cli(const std::vector<std::string>& args);

}  // namespace spce::cli
