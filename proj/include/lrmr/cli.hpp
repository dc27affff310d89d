#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrmr {

/// Runs the command line `args` (program name excluded). Results go to `out`
/// or to the requested files, diagnostics to `err`. Returns the exit code:
/// 0 when the command completed and, for checks, passed.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrmr
