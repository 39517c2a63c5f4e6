#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lotaru::cli {

/// Exit codes: 0 success, 1 module failure, 2 usage or validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Data goes to
/// `out` (or to files named by flags), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace lotaru::cli
