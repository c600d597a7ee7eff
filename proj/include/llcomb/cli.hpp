#pragma once

// Command-line front end: bifpoints, bounds, continue, diagram, evolve, verify.
//
// Exit codes: 0 success, 1 numerical failure (non-convergence, blow-up, failed
// verification), 2 usage error (bad flags, refused candidate, unreadable input).
//
// Option values come from, in increasing priority: built-in defaults, a preset
// (--preset NAME, a JSON file in the preset directory, or a path), a JSON config file
// (--config FILE), and explicit flags. The output directory is the explicit --out flag,
// else $COMB_OUT_DIR, else the preset/config value, else "out".

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace llcomb {

inline constexpr int exit_ok = 0;
inline constexpr int exit_numerical = 1;
inline constexpr int exit_usage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Directory searched for --preset names: $LLCOMB_PRESET_DIR if set, else the
/// directory configured at build time.
std::filesystem::path preset_directory();

} // namespace llcomb
