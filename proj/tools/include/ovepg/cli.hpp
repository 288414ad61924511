#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ovepg::cli {

enum ExitCode : int {
  kOk = 0,
  kParseError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

/// Runs one command. `args` excludes the program name. Human-readable
/// progress goes to `out`; failures print a single JSON line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

/// Expands every `--config FILE` in `args` into `--key=value` tokens placed
/// directly after the command name, so later flags take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace ovepg::cli
