#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cifboot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command line (args excludes the program name). Files go where
/// the command's --out points; `out` receives the primary result, `err`
/// diagnostics. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cifboot::cli
