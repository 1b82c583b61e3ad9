#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aft::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInputError = 1, kUsageError = 2 };

/// Runs one subcommand (simulate, score-mqm, analyze, rerank). `args`
/// excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace aft::cli
