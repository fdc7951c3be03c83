#pragma once

#include <string>
#include <vector>

namespace biaspot::cli {

// Exit codes: 0 success, 1 usage/config error, 2 numerical divergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDiverged = 2;

int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace biaspot::cli
