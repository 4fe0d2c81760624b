#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace icsel {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Entry point behind the icsel executable. args excludes the program name.
// Reports go to --output when given, otherwise to out; diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace icsel
