#pragma once

// Command-line front end. Every subcommand prints its result on stdout (JSON
// reports, CSV for fracint and fracderiv) and writes the same artifacts to the
// output directory: --out, overridden by the CKSTAB_OUT environment variable.

#include <ostream>

namespace ckstab::cli {

/// Exit codes. Verdicts map one-to-one: stable / valid -> Ok, unstable /
/// invalid -> Negative, on the sector boundary -> Inconclusive.
enum ExitCode : int {
    kOk = 0,
    kNumericError = 1,
    kNegative = 2,
    kInconclusive = 3,
    kUsage = 64,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace ckstab::cli
