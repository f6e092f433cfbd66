#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace algsample::cli {

// Exit codes, one per error family.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad arguments, dimension mismatch
  kParse = 2,          // manifold file or expression syntax
  kSolver = 3,         // solver breakdown, degree bound, singular point, unreliable report
  kAcceptance = 4,     // acceptance floor, invalid sampling bounds
  kIo = 5,             // unreadable input, unwritable output
  kDomain = 6,         // integrand or density outside its domain
};

// Runs one command line (without the program name). Results go to `out`
// unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace algsample::cli
