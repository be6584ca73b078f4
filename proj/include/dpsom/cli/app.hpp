#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpsom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Runs the command line `args` (program name first). Errors are reported on
/// `err` and mapped to exit codes: 2 configuration, 3 data, 4 numerical.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Keeps large matrix buffers on the heap between training steps instead of
/// mapping fresh pages for every temporary. Call once at process start.
void tune_allocator();

}  // namespace dpsom::cli
