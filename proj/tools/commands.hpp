#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inplay::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kEstimationError = 4 };

/// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace inplay::cli
