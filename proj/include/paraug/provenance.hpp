#pragma once

#include "paraug/augment_pipeline.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace paraug {

// One line of the provenance JSONL file.
struct ProvenanceEntry {
  std::size_t record_id = 0;
  std::string set;
  bool accepted = false;
  ReplacementRecord record;
  // The synthetic pair, present for accepted and deduplicated records.
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
};

struct AugmentedSet {
  std::string name;
  const AugmentResult* result = nullptr;
  const std::vector<bool>* kept = nullptr;  // from merge_and_dedup; null keeps everything
};

// Accepted pairs first (deduplicated ones become "duplicate" rejections),
// then rejected records, set by set. Record ids are sequential from 0.
std::vector<ProvenanceEntry> build_provenance(std::span<const AugmentedSet> sets);

std::string to_json_line(const ProvenanceEntry& entry);
ProvenanceEntry provenance_from_json_line(std::string_view line);

void write_provenance(const std::filesystem::path& path, std::span<const ProvenanceEntry> entries);
std::vector<ProvenanceEntry> read_provenance(const std::filesystem::path& path);

} // namespace paraug
