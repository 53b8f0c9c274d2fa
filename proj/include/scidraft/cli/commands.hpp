#pragma once

#include <ostream>

namespace scidraft::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDependency = 3;

// Name of the environment variable consulted when --config is absent.
inline constexpr const char* kConfigEnv = "SCIDRAFT_CONFIG";

// Parses the command line and runs one command. Results go to out, progress
// and diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scidraft::cli
