#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace convexclust::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 2;
inline constexpr int exit_not_converged = 3;

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace convexclust::cli
