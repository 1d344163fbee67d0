#pragma once

#include <iosfwd>

namespace kmp::cli {

// Entry point of the `kmp` tool: train | embed | eval | compare | synth.
// Returns the process exit status; diagnostics go to `err` as one line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kmp::cli
