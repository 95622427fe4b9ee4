#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "pulsequota/montecarlo.hpp"

namespace pulsequota::cli {

/// Process exit codes. Every failure maps to exactly one of these.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,     // unreadable, malformed or invalid input
  kHypothesisFailed = 2,  // H1 or H2 does not hold for the configured model
  kBoundViolated = 3,   // a finite closure bound is statistically violated
  kRuntimeError = 4,    // I/O failure or anything unexpected
};

/// Runs one command line. `args` excludes the program name. Reports go to
/// `out`, diagnostics to `err`; the return value is an ExitCode.
///
///   validate | simulate | closures | deterministic | average | sweep
///   --config PATH (required)  --paths N  --seed N  --out DIR  --threads N
///   --bounds PATH (closures)  --axis NAME --values LIST (sweep)
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hand-entered bounds file: `bound_lo = X` and `bound_hi = Y | unbounded`,
/// one per line, `#` comments allowed. Throws ConfigError.
BoundsOverride load_bounds_override(const std::filesystem::path& path);

}  // namespace pulsequota::cli
