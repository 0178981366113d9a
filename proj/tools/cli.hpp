#pragma once

#include <atomic>
#include <ostream>
#include <string>
#include <vector>

namespace pal::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kConfigError = 2, kComparisonFailure = 3 };

/// Entry point behind the `pal` binary. `args` excludes the program name.
/// Setting `*abort` while a run is in progress starts a clean shutdown.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* abort = nullptr);

}  // namespace pal::cli
