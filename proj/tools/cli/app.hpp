#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace transitcast::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 2,
    kExitNonConvergence = 3,
    kExitInternal = 4,
};

// Parses and executes one command. Never throws; failures map to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace transitcast::cli
