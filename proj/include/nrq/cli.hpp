#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nrq::cli {

enum ExitCode : int { ok = 0, usage = 2, data = 3, numerical = 4 };

/// Runs one nrqhash invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nrq::cli
