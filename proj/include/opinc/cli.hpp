#pragma once

#include <optional>
#include <string>

namespace opinc::cli {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  bool strict = false;                // escalate warnings to failures
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 1 input error, 2 check failure
  std::string report_path;
  std::string message;
};

/// Executes one experiment config (JSON) and writes the report plus CSV
/// artifacts into out_dir. Never throws; errors map to exit codes.
RunOutcome run_config_file(const std::string& path, const RunOptions& opts);
RunOutcome run_config_text(const std::string& json_text, const RunOptions& opts);

std::string list_builtins();

}  // namespace opinc::cli
