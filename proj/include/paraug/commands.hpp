#pragma once

#include "paraug/run_config.hpp"
#include "paraug/verify.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace paraug::cli {

// Stable process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_input_error = 2,
  exit_numeric_error = 3,
  exit_stale_cache = 4,
  exit_verification_failed = 5,
};

enum class AugmentMode { rare, dict, both };
AugmentMode parse_augment_mode(std::string_view s);
std::string_view to_string(AugmentMode mode);

std::filesystem::path cache_dir(const RunConfig& config);

struct PrepareReport {
  std::vector<std::string> rebuilt;
  std::vector<std::string> reused;
};

// Trains the aligner and LMs and post-processes embeddings into the cache,
// skipping artifacts whose input hashes and parameters are unchanged.
PrepareReport prepare_cache(const RunConfig& config);

// Throws StaleCacheError if any cached artifact the run needs is missing or
// was built from different inputs or parameters.
void check_cache(const RunConfig& config);

struct VerifyReport {
  std::size_t accepted_records = 0;
  std::vector<Violation> violations;
};

VerifyReport verify_run(const RunConfig& config, const std::optional<std::filesystem::path>& provenance);

// Subcommands. Each maps failures onto ExitCode and logs the reason.
int cmd_stats(const RunConfig& config, std::ostream& out, const std::optional<std::filesystem::path>& json_path = {});
int cmd_prepare(const RunConfig& config);
int cmd_augment(const RunConfig& config, AugmentMode mode);
int cmd_verify(const RunConfig& config, const std::optional<std::filesystem::path>& provenance = {});

// Entry point for the paraug executable.
int run_cli(int argc, char** argv);

} // namespace paraug::cli
