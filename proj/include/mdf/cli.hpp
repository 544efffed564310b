#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace mdf::cli {

// Stable exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kParseError = 1,
  kConfigError = 2,
  kBoundFailed = 3,
  kOptimizerFailed = 4,
  kValidationFailed = 5,
};

// Flags shared by the subcommands. Unset optionals fall back to the config
// file (simulate) or to defaults.
struct CliConfig {
  std::string input_path;
  std::string output_path;  // empty: standard output
  std::optional<double> q;
  std::optional<std::string> procedure;
  std::optional<std::string> sizes;
  std::optional<std::uint64_t> seed;
  std::optional<double> k_sigma;
  bool emit_plot_data = false;
  int threads = 0;
  std::size_t grid_size = 1001;
  std::size_t k_max = 0;
  double tol = 1e-9;
};

int cmd_test(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_optimize(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const CliConfig& config, std::ostream& out, std::ostream& err);

// Parses argv and dispatches. MDF_SEED supplies the seed when no flag or
// config file sets one.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdf::cli
