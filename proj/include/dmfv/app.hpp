#pragma once

// Command-line front end. `run_cli` is what the dmfv binary calls; tests
// drive it directly with captured streams.

#include <ostream>
#include <string>
#include <vector>

namespace dmfv {

enum ExitCode : int { kExitPass = 0, kExitViolations = 1, kExitInput = 2 };

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dmfv
