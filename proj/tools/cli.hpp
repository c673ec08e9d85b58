#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dsr::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kIoError = 2,
  kNumericError = 3,
};

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "DSR_OUTPUT_DIR";

// Runs one command line (args[0] is the program name) and returns its exit
// code. Diagnostics go to `err`, results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsr::cli
