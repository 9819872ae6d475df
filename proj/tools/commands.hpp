#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace pbg::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;  // runtime failure, or more than 10% of a grid failed
inline constexpr int kUsage = 2;   // bad flags or config

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace pbg::cli
