#pragma once

#include <ostream>

namespace pilot::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverFailure = 3, kCertificationFailure = 4 };

/// Entry point of the `pilot` tool. Human-readable output goes to `out`,
/// diagnostics to `err`; CSV files go to the output directory.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pilot::cli
