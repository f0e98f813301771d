#pragma once

// Config-driven experiment runner and the built-in preset catalog. A config is
// a JSON object; see README for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dissflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitStability = 2,
  kExitCheckFailed = 3,
  kExitInternal = 4,  // I/O failures and unexpected solver errors
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::string summary_json;  // empty when the config was rejected
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // relative to output_dir, manifest last
};

/// Validates, runs and writes outputs. Never throws; failures map to exit codes.
RunOutcome run_experiment(std::string_view config_json, const RunOverrides& overrides = {});
RunOutcome run_experiment_file(const std::filesystem::path& config_path,
                               const RunOverrides& overrides = {});

/// Throws ConfigError with the offending key when the config does not match
/// the schema.
void validate_config(std::string_view config_json);

/// Name and value of every pinned tolerance, echoed into each manifest.
std::vector<std::pair<std::string, double>> tolerance_table();

std::vector<std::string> preset_names();
std::string preset_description(std::string_view name);
/// Throws ConfigError for an unknown name.
std::string preset_config(std::string_view name);

}  // namespace dissflow
