#pragma once

#include <string>
#include <vector>

namespace sib::cli {

// Exit codes: 0 success, 1 usage/config error, 2 data or format error,
// 3 numerical divergence.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // without argv[0]

}  // namespace sib::cli
