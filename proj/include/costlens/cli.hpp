#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace costlens::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kIo = 3 };

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace costlens::cli
