#pragma once

#include <string>

namespace qfilter {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 threshold failure, 2 usage/config error.
int run_cli(int argc, const char* const* argv);

}  // namespace qfilter
