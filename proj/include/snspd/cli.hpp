#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace snspd {

// Exit codes of the command-line tool.
constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snspd
