#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace themeflow::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kIoError = 3 };

/// Runs one `themeflow` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace themeflow::cli
