#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latentopt {

/// Entry point of the `latentopt` tool. `args` excludes the program name.
/// Failures print one line `error: TAG: message` to `err` and return
///   1  configuration or input problems
///   2  backend or transport problems
///   3  optimization aborted
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latentopt
