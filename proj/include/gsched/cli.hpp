#pragma once

#include <string>
#include <vector>

namespace gsched::cli {

// Exit codes: 0 success, 1 usage or parse error, 2 validation failure,
// 3 oracle size guard.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace gsched::cli
