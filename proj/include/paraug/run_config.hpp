#pragma once

#include "paraug/augment_pipeline.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paraug {

struct RunConfig {
  std::filesystem::path source_corpus;
  std::filesystem::path target_corpus;
  std::optional<std::filesystem::path> mono_source;
  std::optional<std::filesystem::path> mono_target;
  std::optional<std::filesystem::path> embeddings_source;
  std::optional<std::filesystem::path> embeddings_target;
  std::optional<std::filesystem::path> annotations_source;
  std::optional<std::filesystem::path> annotations_target;
  std::optional<std::filesystem::path> dictionary;
  std::optional<std::filesystem::path> reference_source;
  std::optional<std::filesystem::path> lm_source_arpa;
  std::optional<std::filesystem::path> lm_target_arpa;
  std::filesystem::path output_dir = "paraug-run";
  std::size_t workers = 1;
  std::string log_level = "info";

  AugmentationConfig augment;
  std::optional<std::string> ablation;
  std::size_t em_iterations = 10;
  std::size_t lm_min_count = 1;
  bool filter_digits = true;
  bool filter_punctuation = true;
  bool filter_embeddings = true;
  bool filter_annotations = true;
};

// Every key accepted in a config file and as a --flag override.
const std::vector<std::string>& config_keys();

// Sets one key from its textual value. Relative paths resolve against `base_dir`.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

// Flat "key = value" lines; '#' starts a comment.
RunConfig load_run_config(const std::filesystem::path& path);
void apply_settings_text(RunConfig& config, std::string_view text, const std::filesystem::path& base_dir = {});

// All settings with defaults materialized, excluding output_dir, workers and
// log_level, which do not affect results.
std::map<std::string, std::string> resolved_settings(const RunConfig& config);

// Throws InputError naming the first referenced path that does not exist.
void require_paths(const RunConfig& config, const std::vector<std::string>& keys);

} // namespace paraug
