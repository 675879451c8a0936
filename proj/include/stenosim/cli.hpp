// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace stenosim {

// Entry point behind the command-line tool. Returns the process exit code;
// failures print a machine-readable JSON error object to stderr.
int run_command(const std::vector<std::string>& args);

}  // namespace stenosim
