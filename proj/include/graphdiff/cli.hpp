#pragma once

#include <iosfwd>

namespace graphdiff {

/// Process exit codes shared by all subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,
  kExitParse = 2,
  kExitAcceptance = 3,
};

/// Entry point of the `graphdiff` tool. Subcommands: validate, limit-q, sweep,
/// resolvent-check, duality-check, export-generator. Results go to `out`
/// unless --out names a file; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace graphdiff
