#pragma once

#include <iosfwd>

namespace blend::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

/// Entry point shared by the `blend` binary and the tests. Subcommands:
/// allocate, tune-vb, simulate, experiment, pipeline.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blend::cli
