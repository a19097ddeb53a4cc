#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace paraug {

struct Sentence {
  std::size_t id = 0;
  std::vector<std::string> tokens;

  bool operator==(const Sentence&) const = default;
};

struct ParallelCorpus {
  std::vector<Sentence> source;
  std::vector<Sentence> target;

  std::size_t size() const noexcept { return source.size(); }
};

// A loaded value plus the non-fatal warnings raised while reading it.
template <typename T>
struct Loaded {
  T value;
  std::vector<std::string> warnings;
};

// Reads a sentence-aligned bitext. Pairs where either line is blank are
// dropped on both sides and ids are renumbered densely.
Loaded<ParallelCorpus> load_parallel_corpus(const std::filesystem::path& source_path,
                                            const std::filesystem::path& target_path);

// One sentence per line; blank lines are skipped with a warning.
Loaded<std::vector<Sentence>> load_monolingual(const std::filesystem::path& path);

void write_sentences(const std::filesystem::path& path, std::span<const Sentence> sentences);

struct Vocabulary {
  std::map<std::string, std::size_t, std::less<>> counts;
  std::size_t total_tokens = 0;

  std::size_t count(std::string_view token) const;
  bool contains(std::string_view token) const { return counts.find(token) != counts.end(); }
};

Vocabulary build_vocabulary(std::span<const Sentence> side);

struct RareWord {
  std::string surface;
  std::size_t frequency = 0;
  std::vector<std::size_t> host_sentence_ids;

  bool operator==(const RareWord&) const = default;
};

// Each filter is independently switchable; the resource filters apply only
// when the corresponding lookup is provided.
struct RareWordValidity {
  bool reject_digits = true;
  bool reject_punctuation = true;
  std::function<bool(const std::string&)> in_embeddings;
  std::function<bool(const std::string&)> in_annotations;

  static RareWordValidity none() { return {false, false, {}, {}}; }
};

inline constexpr std::size_t unlimited_threshold = std::numeric_limits<std::size_t>::max();

// Words with count <= t_r that pass the validity filter, sorted by surface.
// Throws std::invalid_argument when t_r == 0.
std::vector<RareWord> extract_rare_words(const Vocabulary& vocab, std::span<const Sentence> corpus_side,
                                         std::size_t t_r, const RareWordValidity& validity);

struct DictionaryEntry {
  std::vector<std::string> source_term;
  std::vector<std::string> target_term;

  bool operator==(const DictionaryEntry&) const = default;
  auto operator<=>(const DictionaryEntry&) const = default;
};

// Two-column TSV. Duplicate rows collapse to their first occurrence.
Loaded<std::vector<DictionaryEntry>> load_dictionary(const std::filesystem::path& path);

struct SideStats {
  std::size_t word_count = 0;
  std::size_t unique_words = 0;
  std::size_t rare_word_count = 0;
};

struct StatsReport {
  std::size_t sentence_count = 0;
  SideStats source;
  SideStats target;
  std::size_t dict_term_count = 0;
  std::size_t dict_oov_term_count = 0;
};

// dict_oov_term_count counts entries none of whose source tokens occur in the
// reference vocabulary (the corpus source side when no reference is given).
StatsReport corpus_stats(const ParallelCorpus& corpus, std::size_t t_r,
                         const std::vector<DictionaryEntry>* dictionary = nullptr,
                         const Vocabulary* reference_vocab = nullptr);

std::string format_stats(const StatsReport& report);
std::string stats_to_json(const StatsReport& report);

} // namespace paraug
