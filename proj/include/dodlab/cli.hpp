#ifndef DODLAB_CLI_HPP_
#define DODLAB_CLI_HPP_

#include <string>
#include <vector>

namespace dodlab {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitFailure = 1,
  kExitUsage = 2,
};

const char* version();

/// Parses a comma-separated list whose items are numbers or inclusive
/// `start:step:stop` ranges. Throws std::invalid_argument on bad syntax.
std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

int run_cli(int argc, const char* const* argv);

}  // namespace dodlab

#endif  // DODLAB_CLI_HPP_
