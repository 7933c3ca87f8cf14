#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skilldyn::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit statuses.
enum Exit : int { kOk = 0, kNumericError = 1, kUsageError = 2 };

/// Runs one command line (args excludes the program name). Primary results
/// go to `out` as JSON, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace skilldyn::cli
