#pragma once

#include <ostream>

namespace ssoct::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Entry point of the `ssoct` tool. Progress goes to `err` unless --quiet;
/// timestamped lines go to <out>/ssoct.log.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssoct::cli
