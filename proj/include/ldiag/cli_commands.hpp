#pragma once

// The fit / test / simulate commands, callable without the argument parser.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ldiag/error.hpp"

namespace ldiag {

struct RunConfig {
  std::string command;                    // fit | test | simulate
  std::string input;                      // panel CSV (fit, test)
  std::optional<std::string> schema;      // schema JSON; inferred from the data when absent
  std::optional<std::size_t> B;           // default 1000; overrides the sim config when set
  std::optional<std::uint64_t> seed;      // default 1; overrides the sim config when set
  unsigned workers = 0;                   // 0: one per hardware thread
  std::string out = ".";
  bool json = true;
  bool csv = true;
  std::vector<double> levels{0.01, 0.05, 0.10};
  std::string config;                     // sim config file (simulate)
  bool dump_replicates = false;           // test: write per-replicate CSVs
};

/// Exit codes: 0 success, 2 input error, 3 numerical failure, 4 config error.
[[nodiscard]] int exit_code_for(ErrorCategory category) noexcept;

/// Parses "0.01,0.05,0.10"; each level must lie in (0, 1).
[[nodiscard]] std::vector<double> parse_levels(const std::string& text);
/// Parses "json,csv" into the two flags of `cfg`.
void parse_formats(const std::string& text, RunConfig& cfg);

void cmd_fit(const RunConfig& cfg, std::ostream& log);
void cmd_test(const RunConfig& cfg, std::ostream& log);
void cmd_simulate(const RunConfig& cfg, std::ostream& log);

/// Dispatches on cfg.command and maps errors to exit codes, printing a
/// one-line structured message to `err`.
[[nodiscard]] int run_command(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace ldiag
