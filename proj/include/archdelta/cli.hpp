#pragma once

#include <ostream>

namespace archdelta {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEnvironment = 1;
inline constexpr int kExitMissingCache = 2;
inline constexpr int kExitUsage = 64;

// Entry point of the archdelta command line. Data goes to `out`, progress
// and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace archdelta
