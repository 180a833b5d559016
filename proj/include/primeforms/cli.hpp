#pragma once

// Command-line front end. Each subcommand turns its flags into a JSON config
// with every default filled in, runs it, and records that config in a
// manifest so the run can be replayed with --from-manifest.

#include <ostream>
#include <string>
#include <vector>

namespace primeforms::cli {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitPrecondition = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitUsage = 64;

/// Reports go to `out` (and to files under the output directory, if any);
/// diagnostics and, without an output directory, the manifest go to `err`.
/// The output directory is --out, else $PRIMEFORMS_OUT_DIR, else none.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace primeforms::cli
