#pragma once

#include <string>
#include <vector>

namespace lab {

// Exit codes: 0 success, 2 validation failure, 3 budget/precision failure.
int run_command(const std::vector<std::string>& args);

}  // namespace lab
