#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stylearena::cli {

/// Parses `args` (without the program name), runs one subcommand and returns
/// the process exit code: 0 success, 2 validation or audit failure, 3 I/O,
/// 4 numeric non-convergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stylearena::cli
