#pragma once

#include <iosfwd>

namespace ees::cli {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ees::cli
