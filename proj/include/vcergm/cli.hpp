#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vcergm::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Runs one command. args[0] is the program name. Regular output goes to
/// out (or to the files named by the command), diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Expands `--config <file>` (flat `key = value` lines, keys matching long
/// flags) into command-line arguments placed before the explicit ones, so
/// flags given on the command line win. Throws UsageError on a malformed file.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace vcergm::cli
