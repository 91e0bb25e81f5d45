#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace replica_grid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitInternal = 3;

// Runs one command line (args[0] is the program name). Never throws; the
// return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace replica_grid::cli
