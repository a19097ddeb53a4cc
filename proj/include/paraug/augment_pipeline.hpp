#pragma once

#include "paraug/agreement_filter.hpp"
#include "paraug/corpus_io.hpp"
#include "paraug/embedding_space.hpp"
#include "paraug/trigram_lm.hpp"
#include "paraug/word_aligner.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace paraug {

enum class DictionaryScope { oov_only, all };

std::string_view to_string(DictionaryScope scope);
DictionaryScope parse_dictionary_scope(std::string_view s);

struct AugmentationConfig {
  std::size_t t_r = 1;
  double alpha_src = -0.15;
  double alpha_tgt = 0.15;
  bool use_sent_sim = false;
  std::size_t sent_k = 10;
  bool use_word_sim = true;
  double word_sim_min = 0.5;
  bool use_pos = false;
  bool use_morph = false;
  double lm_threshold = 0.6;
  std::size_t max_per_item = 3;
  std::size_t max_span = 5;
  std::size_t soft_cap = 12000;
  LanguageRole source_role = LanguageRole::morph_rich;
  DictionaryScope dict_scope = DictionaryScope::all;

  SyntacticMode syntactic_mode() const noexcept;

  // Throws ConfigError on out-of-range values or use_morph without use_pos.
  void validate() const;
};

// Named gate combinations, one per experiment row:
// off, wordSim, pos, pos_morph, wordSim_pos, wordSim_pos_morph,
// wordSim_sentSim, wordSim_sentSim_pos_morph.
const std::vector<std::string>& ablation_presets();
void apply_ablation_preset(AugmentationConfig& config, std::string_view preset);

enum class ItemKind { rare_word, dictionary };

enum class RejectReason {
  unaligned,
  span_too_long,
  no_candidate_word,
  word_sim,
  unannotated,
  pos,
  morph,
  lm_src,
  lm_tgt,
  coverage,
  in_vocabulary,
  duplicate,
};

std::string_view to_string(ItemKind kind);
std::string_view to_string(RejectReason reason);
ItemKind parse_item_kind(std::string_view s);
RejectReason parse_reject_reason(std::string_view s);
const std::vector<RejectReason>& all_reject_reasons();

struct SyntacticVerdict {
  bool ok = true;
  std::string reason;  // disabled, agree, pos, morph, unannotated

  bool operator==(const SyntacticVerdict&) const = default;
};

// Evidence for one replacement attempt. Optional fields stay empty when the
// attempt was rejected before the corresponding gate ran.
struct ReplacementRecord {
  ItemKind item_kind = ItemKind::rare_word;
  std::vector<std::string> item_surface;
  std::optional<std::size_t> base_sentence_id;
  std::optional<TokenSpan> source_span;
  std::vector<std::string> source_replaced;
  std::vector<std::string> source_inserted;
  std::optional<TokenSpan> target_span;
  std::vector<std::string> target_replaced;
  std::vector<std::string> target_inserted;
  std::optional<double> word_sim;
  std::optional<double> sent_sim;
  std::optional<SyntacticVerdict> syntactic;
  std::optional<double> lm_ratio_src;
  std::optional<double> lm_ratio_tgt;
  std::optional<RejectReason> rejection;

  bool operator==(const ReplacementRecord&) const = default;
};

struct SyntheticPair {
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  ReplacementRecord record;
};

// Pure splice of both sides. Throws std::logic_error for a span that is
// reversed or out of range, or for an empty insertion.
SyntheticPair apply_replacement(const Sentence& source, const Sentence& target, TokenSpan source_span,
                                std::vector<std::string> source_insert, TokenSpan target_span,
                                std::vector<std::string> target_insert);

// Read-only inputs shared by every augmentation item. The alignment table
// must be trained on `corpus` in src_given_tgt direction.
struct PipelineResources {
  const ParallelCorpus& corpus;
  const EmbeddingTable& embeddings_src;
  const TranslationTable& alignment;
  const LanguageModel& lm_src;
  const LanguageModel& lm_tgt;
  const AnnotatedLexicon* lexicon_src = nullptr;
};

struct AugmentResult {
  std::vector<SyntheticPair> accepted;
  std::vector<ReplacementRecord> rejected;
};

// Rare-word replacement. Items are processed in parallel; results are
// assembled in item order, then candidate order.
AugmentResult augment_rare_words(const PipelineResources& resources, std::span<const RareWord> rare_words,
                                 const AugmentationConfig& config, std::size_t workers = 1);

// Dictionary-term replacement. Every sentence is a candidate; a config with
// use_sent_sim set is refused with ConfigError.
AugmentResult augment_dictionary(const PipelineResources& resources, std::span<const DictionaryEntry> dictionary,
                                 const AugmentationConfig& config, std::size_t workers = 1);

struct SetSummary {
  std::string name;
  std::size_t accepted = 0;
  std::size_t deduped = 0;
};

struct MergeResult {
  ParallelCorpus corpus;
  std::vector<SetSummary> sets;
  std::vector<std::vector<bool>> kept;  // per set, per synthetic pair
  std::size_t base_pairs = 0;
  std::size_t synthetic_pairs = 0;
  std::vector<std::string> warnings;
};

struct NamedSet {
  std::string name;
  std::span<const SyntheticPair> pairs;
};

// Base pairs first, then synthetic pairs in set order. Pairs identical on
// both sides to a base pair or an earlier synthetic pair are dropped.
MergeResult merge_and_dedup(const ParallelCorpus& base, std::span<const NamedSet> sets,
                            std::size_t soft_cap = 12000);

} // namespace paraug
