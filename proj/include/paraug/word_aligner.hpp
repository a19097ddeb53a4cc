#pragma once

#include "paraug/corpus_io.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace paraug {

// Which side is generated. src_given_tgt estimates t(source word | target
// word) with NULL on the target side, so every source position receives at
// most one link; this is the direction the augmentation pipeline uses.
enum class AlignDirection { src_given_tgt, tgt_given_src };

std::string_view to_string(AlignDirection d);
AlignDirection parse_align_direction(std::string_view s);

// Lexical table t(generated | conditioning). The conditioning vocabulary
// always contains the NULL token.
class TranslationTable {
public:
  static constexpr std::string_view null_token = "<NULL>";

  TranslationTable() = default;

  AlignDirection direction() const noexcept { return direction_; }

  // 0 for pairs that never co-occurred or unknown tokens.
  double prob(const std::string& generated, const std::string& conditioning) const;
  double prob_null(const std::string& generated) const;

  bool knows_generated(const std::string& token) const { return generated_ids_.count(token) != 0; }
  bool knows_conditioning(const std::string& token) const { return conditioning_ids_.count(token) != 0; }

  std::size_t entry_count() const noexcept { return probs_.size(); }

  // Visits (generated, conditioning, probability) for every stored entry.
  void for_each(const std::function<void(const std::string&, const std::string&, double)>& fn) const;

  // Corpus log-likelihood before the first iteration and after each iteration.
  const std::vector<double>& log_likelihood() const noexcept { return log_likelihood_; }

private:
  friend TranslationTable train_ibm1(const ParallelCorpus&, std::size_t, AlignDirection, std::size_t);
  friend TranslationTable load_translation_table(const std::filesystem::path&);

  std::uint32_t intern_conditioning(const std::string& token);
  std::uint32_t intern_generated(const std::string& token);
  static std::uint64_t key(std::uint32_t cond, std::uint32_t gen) {
    return (static_cast<std::uint64_t>(cond) << 32) | gen;
  }
  double lookup(std::uint32_t cond, std::uint32_t gen) const;

  AlignDirection direction_ = AlignDirection::src_given_tgt;
  std::unordered_map<std::string, std::uint32_t> conditioning_ids_;
  std::unordered_map<std::string, std::uint32_t> generated_ids_;
  std::vector<std::string> conditioning_names_;
  std::vector<std::string> generated_names_;
  std::unordered_map<std::uint64_t, double> probs_;
  std::vector<double> log_likelihood_;
};

// IBM Model 1 trained by EM from a uniform start over co-occurring pairs.
// The E-step runs on `workers` threads; counts are reduced in sentence order
// so the result is bit-identical for any worker count.
TranslationTable train_ibm1(const ParallelCorpus& corpus, std::size_t iterations,
                            AlignDirection direction = AlignDirection::src_given_tgt, std::size_t workers = 1);

// TSV "target<TAB>source<TAB>probability" (12 significant digits), sorted by
// (source, target), after a "#direction" line naming the conditioned side.
void save_translation_table(const std::filesystem::path& path, const TranslationTable& table);
TranslationTable load_translation_table(const std::filesystem::path& path);

struct AlignmentLink {
  std::size_t source = 0;
  std::size_t target = 0;

  auto operator<=>(const AlignmentLink&) const = default;
};

struct SentenceAlignment {
  std::vector<AlignmentLink> links;  // sorted by (source, target)

  bool operator==(const SentenceAlignment&) const = default;
};

struct AlignResult {
  SentenceAlignment alignment;
  std::size_t unknown_tokens = 0;  // generated-side tokens the table has never seen
};

// Model 1 Viterbi: each generated-side word links to the conditioning word
// with the highest t, lowest index on ties; NULL wins only when strictly
// better, and a NULL choice leaves the word unlinked.
AlignResult viterbi_align(const Sentence& source, const Sentence& target, const TranslationTable& table);

struct TargetSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  std::size_t length() const noexcept { return end - start + 1; }
  bool operator==(const TargetSpan&) const = default;
};

enum class SpanFailure { none, unlinked, too_long };

struct TargetSpanLookup {
  std::optional<TargetSpan> span;
  SpanFailure failure = SpanFailure::none;
};

TargetSpanLookup lookup_target_span(const SentenceAlignment& alignment, std::size_t source_index,
                                    std::size_t max_span);

inline std::optional<TargetSpan> target_span(const SentenceAlignment& alignment, std::size_t source_index,
                                             std::size_t max_span) {
  return lookup_target_span(alignment, source_index, max_span).span;
}

struct RareWordTranslation {
  std::optional<std::vector<std::string>> tokens;
  SpanFailure failure = SpanFailure::none;
  std::size_t host_sentence = 0;
  std::size_t source_index = 0;
};

// Aligns the lowest-id host sentence and reads off the target span at the
// rare word's first position there.
RareWordTranslation translate_rare_word(const RareWord& rare, const ParallelCorpus& corpus,
                                        const TranslationTable& table, std::size_t max_span);

// Pharaoh "i-j" format, 0-based, space separated, sorted by (i, j).
std::string export_pharaoh(const SentenceAlignment& alignment);
SentenceAlignment import_pharaoh(std::string_view line);

} // namespace paraug
