#pragma once

#include <iosfwd>

namespace aesprice {

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime or configuration error
inline constexpr int kExitUsage = 2;    // bad or missing flags

/// Entry point of the `aesprice` tool: subcommands price, bench, tables, paths.
/// Results go to `out`, diagnostics and progress logs to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aesprice
