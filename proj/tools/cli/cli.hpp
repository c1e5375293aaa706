#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stopwindow::cli {

// Process exit codes. Stable: scripts and the serve-mode adapter rely on them.
inline constexpr int kExitOk = 0;  // also: detector stopped
inline constexpr int kExitIo = 1;  // unreadable file, parse error, protocol breach
inline constexpr int kExitConfig = 2;
inline constexpr int kExitExhausted = 3;
inline constexpr int kExitMissingLoss = 4;

/// Version reported by `--version`; the serve protocol revision follows it.
std::string version_string();

/// Runs one command line (`args[0]` is the program name). Results go to
/// `out`, diagnostics to `err`; `in` backs `serve` and `-` trace paths.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace stopwindow::cli
