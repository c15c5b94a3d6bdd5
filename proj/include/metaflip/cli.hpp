#pragma once

// `metaflip` command line: simulate, oracle, synthesize, check, fit.
//
// Exit codes: 0 success, 2 input or contract error, 3 numerical-domain
// error, 4 factorization or constraint failure.

#include <iosfwd>

namespace metaflip {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitNumerical = 3,
  kExitConstraint = 4,
};

/// Runs one subcommand. Normal output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace metaflip
