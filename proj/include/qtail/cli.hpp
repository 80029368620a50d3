#pragma once

#include <iosfwd>

namespace qtail::cli {

/// Exit codes of the qtail tool.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,     ///< I/O or numerical failure
  kInvalid = 2,     ///< bad arguments or configuration
  kDivergence = 3,  ///< run completed but flagged divergence or instability
};

/// Entry point of `qtail fig1|fig2|classify|ldt|custom`. Diagnostics go to
/// `err`, the run summary to `out`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qtail::cli
