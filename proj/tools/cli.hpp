#pragma once

#include <iosfwd>

namespace imbalance::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the `imbalance` binary and the CLI tests.
/// Subcommands: run, sweep, sweep-tversky, gradcheck, gen-data.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace imbalance::cli
