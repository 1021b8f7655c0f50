#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kaczmarz::cli {

// Exit codes: 0 success, 2 usage, 3 input parse, 4 not converged, 5 output I/O.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitParse = 3;
inline constexpr int kExitNotConverged = 4;
inline constexpr int kExitIo = 5;

/// Runs one command (args exclude the program name). All human/machine output
/// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kaczmarz::cli
