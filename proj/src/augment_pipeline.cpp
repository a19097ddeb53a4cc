#include "paraug/augment_pipeline.hpp"

#include "paraug/errors.hpp"
#include "paraug/parallel.hpp"
#include "paraug/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace paraug {

std::string_view to_string(DictionaryScope scope) { return scope == DictionaryScope::all ? "all" : "oov_only"; }

DictionaryScope parse_dictionary_scope(std::string_view s) {
  if (s == "all") return DictionaryScope::all;
  if (s == "oov_only") return DictionaryScope::oov_only;
  throw ConfigError("unknown dictionary scope: " + std::string(s));
}

SyntacticMode AugmentationConfig::syntactic_mode() const noexcept {
  if (!use_pos) return SyntacticMode::off;
  return use_morph ? SyntacticMode::pos_morph : SyntacticMode::pos;
}

void AugmentationConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid augmentation config: " + msg); };
  if (t_r < 1) fail("t_r must be >= 1");
  if (!std::isfinite(alpha_src) || !std::isfinite(alpha_tgt)) fail("alpha values must be finite");
  if (sent_k < 1) fail("sent_k must be >= 1");
  if (!(word_sim_min >= -1.0 && word_sim_min <= 1.0)) fail("word_sim_min must lie in [-1, 1]");
  if (!(lm_threshold > 0.0) || !std::isfinite(lm_threshold)) fail("lm_threshold must be > 0");
  if (max_per_item < 1) fail("max_per_item must be >= 1");
  if (max_span < 1) fail("max_span must be >= 1");
  if (use_morph && !use_pos) fail("use_morph requires use_pos");
}

const std::vector<std::string>& ablation_presets() {
  static const std::vector<std::string> presets{"off",         "wordSim",           "pos",
                                                "pos_morph",   "wordSim_pos",       "wordSim_pos_morph",
                                                "wordSim_sentSim", "wordSim_sentSim_pos_morph"};
  return presets;
}

void apply_ablation_preset(AugmentationConfig& config, std::string_view preset) {
  struct Gates {
    bool word, sent, pos, morph;
  };
  Gates g{};
  if (preset == "off") g = {false, false, false, false};
  else if (preset == "wordSim") g = {true, false, false, false};
  else if (preset == "pos") g = {false, false, true, false};
  else if (preset == "pos_morph") g = {false, false, true, true};
  else if (preset == "wordSim_pos") g = {true, false, true, false};
  else if (preset == "wordSim_pos_morph") g = {true, false, true, true};
  else if (preset == "wordSim_sentSim") g = {true, true, false, false};
  else if (preset == "wordSim_sentSim_pos_morph") g = {true, true, true, true};
  else throw ConfigError("unknown ablation preset: " + std::string(preset));
  config.use_word_sim = g.word;
  config.use_sent_sim = g.sent;
  config.use_pos = g.pos;
  config.use_morph = g.morph;
}

std::string_view to_string(ItemKind kind) { return kind == ItemKind::rare_word ? "rare_word" : "dictionary"; }

ItemKind parse_item_kind(std::string_view s) {
  if (s == "rare_word") return ItemKind::rare_word;
  if (s == "dictionary") return ItemKind::dictionary;
  throw ParseError("unknown item kind: " + std::string(s));
}

const std::vector<RejectReason>& all_reject_reasons() {
  static const std::vector<RejectReason> reasons{
      RejectReason::unaligned,  RejectReason::span_too_long, RejectReason::no_candidate_word,
      RejectReason::word_sim,   RejectReason::unannotated,   RejectReason::pos,
      RejectReason::morph,      RejectReason::lm_src,        RejectReason::lm_tgt,
      RejectReason::coverage,   RejectReason::in_vocabulary, RejectReason::duplicate};
  return reasons;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
  case RejectReason::unaligned: return "unaligned";
  case RejectReason::span_too_long: return "span_too_long";
  case RejectReason::no_candidate_word: return "no_candidate_word";
  case RejectReason::word_sim: return "word_sim";
  case RejectReason::unannotated: return "unannotated";
  case RejectReason::pos: return "pos";
  case RejectReason::morph: return "morph";
  case RejectReason::lm_src: return "lm_src";
  case RejectReason::lm_tgt: return "lm_tgt";
  case RejectReason::coverage: return "coverage";
  case RejectReason::in_vocabulary: return "in_vocabulary";
  case RejectReason::duplicate: return "duplicate";
  }
  return "unknown";
}

RejectReason parse_reject_reason(std::string_view s) {
  for (auto r : all_reject_reasons())
    if (to_string(r) == s) return r;
  throw ParseError("unknown rejection reason: " + std::string(s));
}

namespace {

std::vector<std::string> splice(const std::vector<std::string>& base, TokenSpan span,
                                const std::vector<std::string>& insert) {
  std::vector<std::string> out(base.begin(), base.begin() + static_cast<std::ptrdiff_t>(span.start));
  out.insert(out.end(), insert.begin(), insert.end());
  out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(span.end) + 1, base.end());
  return out;
}

void check_span(TokenSpan span, std::size_t size, const char* side) {
  if (span.start > span.end || span.end >= size)
    throw std::logic_error(std::string("apply_replacement: invalid ") + side + " span");
}

} // namespace

SyntheticPair apply_replacement(const Sentence& source, const Sentence& target, TokenSpan source_span,
                                std::vector<std::string> source_insert, TokenSpan target_span,
                                std::vector<std::string> target_insert) {
  check_span(source_span, source.tokens.size(), "source");
  check_span(target_span, target.tokens.size(), "target");
  if (source_insert.empty() || target_insert.empty())
    throw std::logic_error("apply_replacement: empty insertion");

  SyntheticPair out;
  out.source_tokens = splice(source.tokens, source_span, source_insert);
  out.target_tokens = splice(target.tokens, target_span, target_insert);
  auto& rec = out.record;
  rec.base_sentence_id = source.id;
  rec.source_span = source_span;
  rec.source_replaced.assign(source.tokens.begin() + static_cast<std::ptrdiff_t>(source_span.start),
                             source.tokens.begin() + static_cast<std::ptrdiff_t>(source_span.end) + 1);
  rec.source_inserted = std::move(source_insert);
  rec.target_span = target_span;
  rec.target_replaced.assign(target.tokens.begin() + static_cast<std::ptrdiff_t>(target_span.start),
                             target.tokens.begin() + static_cast<std::ptrdiff_t>(target_span.end) + 1);
  rec.target_inserted = std::move(target_insert);
  return out;
}

namespace {

// Everything an item needs once its query vector and translation are known.
struct ItemSpec {
  ItemKind kind = ItemKind::rare_word;
  std::vector<std::string> source_insert;
  std::vector<std::string> target_insert;
  std::vector<double> query;
  const TokenAnnotation* annotation = nullptr;
  std::vector<std::size_t> candidates;
  std::vector<std::optional<double>> candidate_sent_sims;
};

struct ItemOutcome {
  std::vector<SyntheticPair> accepted;
  std::vector<ReplacementRecord> rejected;
};

ReplacementRecord item_rejection(ItemKind kind, std::vector<std::string> surface, RejectReason reason) {
  ReplacementRecord rec;
  rec.item_kind = kind;
  rec.item_surface = std::move(surface);
  rec.rejection = reason;
  return rec;
}

// Alignments of every corpus pair, computed once per run.
std::vector<SentenceAlignment> align_corpus(const PipelineResources& res, std::size_t workers) {
  std::vector<SentenceAlignment> out(res.corpus.size());
  parallel_for(out.size(), workers, [&](std::size_t s) {
    out[s] = viterbi_align(res.corpus.source[s], res.corpus.target[s], res.alignment).alignment;
  });
  return out;
}

bool replaceable_token(const std::string& token, const std::vector<std::string>& self) {
  if (has_ascii_digit(token) || is_all_punctuation(token)) return false;
  return std::find(self.begin(), self.end(), token) == self.end();
}

// Runs one item over its ordered candidate sentences.
ItemOutcome process_item(const ItemSpec& item, const PipelineResources& res,
                         const std::vector<SentenceAlignment>& alignments, const AugmentationConfig& config) {
  ItemOutcome out;
  const SyntacticMode mode = config.syntactic_mode();

  for (std::size_t c = 0; c < item.candidates.size() && out.accepted.size() < config.max_per_item; ++c) {
    const std::size_t sid = item.candidates[c];
    const auto& src = res.corpus.source[sid];
    const auto& tgt = res.corpus.target[sid];

    ReplacementRecord rec;
    rec.item_kind = item.kind;
    rec.item_surface = item.source_insert;
    rec.base_sentence_id = sid;
    rec.sent_sim = item.candidate_sent_sims[c];
    rec.source_inserted = item.source_insert;
    rec.target_inserted = item.target_insert;
    auto reject = [&](RejectReason reason) {
      rec.rejection = reason;
      out.rejected.push_back(std::move(rec));
    };

    // Candidate word by maximum cosine similarity.
    const auto best = best_word_in_sentence(item.query, src.tokens, res.embeddings_src, [&](std::size_t i) {
      return replaceable_token(src.tokens[i], item.source_insert);
    });
    if (!best) {
      reject(RejectReason::no_candidate_word);
      continue;
    }
    const TokenSpan source_span{best->id, best->id};
    rec.source_span = source_span;
    rec.source_replaced = {src.tokens[best->id]};
    rec.word_sim = best->score;
    if (config.use_word_sim && best->score < config.word_sim_min) {
      reject(RejectReason::word_sim);
      continue;
    }

    // Syntactic agreement on the source side.
    if (mode == SyntacticMode::off) {
      rec.syntactic = SyntacticVerdict{true, "disabled"};
    } else {
      const TokenAnnotation* cand = res.lexicon_src ? res.lexicon_src->find(src.tokens[best->id]) : nullptr;
      if (!cand) {
        rec.syntactic = SyntacticVerdict{false, "unannotated"};
        reject(RejectReason::unannotated);
        continue;
      }
      switch (syntactic_failure(config.source_role, *item.annotation, *cand, mode)) {
      case SyntacticFailure::none:
        rec.syntactic = SyntacticVerdict{true, "agree"};
        break;
      case SyntacticFailure::pos:
        rec.syntactic = SyntacticVerdict{false, "pos"};
        reject(RejectReason::pos);
        continue;
      case SyntacticFailure::morph:
        rec.syntactic = SyntacticVerdict{false, "morph"};
        reject(RejectReason::morph);
        continue;
      }
    }

    // Locate the target span through the alignment, then splice and score both sides.
    const auto lookup = lookup_target_span(alignments[sid], best->id, config.max_span);
    if (!lookup.span) {
      reject(lookup.failure == SpanFailure::too_long ? RejectReason::span_too_long : RejectReason::unaligned);
      continue;
    }
    const TokenSpan target_span{lookup.span->start, lookup.span->end};
    auto pair = apply_replacement(src, tgt, source_span, item.source_insert, target_span, item.target_insert);
    pair.record.item_kind = rec.item_kind;
    pair.record.item_surface = rec.item_surface;
    pair.record.sent_sim = rec.sent_sim;
    pair.record.word_sim = rec.word_sim;
    pair.record.syntactic = rec.syntactic;

    const TokenSpan syn_src_span{source_span.start, source_span.start + item.source_insert.size() - 1};
    const TokenSpan syn_tgt_span{lookup.span->start, lookup.span->start + item.target_insert.size() - 1};
    const auto lm_src = lm_ratio_accept(res.lm_src, src.tokens, source_span, pair.source_tokens, syn_src_span,
                                        config.lm_threshold);
    const auto lm_tgt = lm_ratio_accept(res.lm_tgt, tgt.tokens, target_span, pair.target_tokens, syn_tgt_span,
                                        config.lm_threshold);
    pair.record.lm_ratio_src = lm_src.ratio;
    pair.record.lm_ratio_tgt = lm_tgt.ratio;
    if (!lm_src.accept || !lm_tgt.accept) {
      pair.record.rejection = !lm_src.accept ? RejectReason::lm_src : RejectReason::lm_tgt;
      out.rejected.push_back(std::move(pair.record));
      continue;
    }
    out.accepted.push_back(std::move(pair));
  }
  return out;
}

AugmentResult assemble(std::vector<std::optional<ReplacementRecord>>& early, std::vector<ItemOutcome>& outcomes) {
  AugmentResult result;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (early[i]) result.rejected.push_back(std::move(*early[i]));
    for (auto& p : outcomes[i].accepted) result.accepted.push_back(std::move(p));
    for (auto& r : outcomes[i].rejected) result.rejected.push_back(std::move(r));
  }
  return result;
}

const TokenAnnotation* term_annotation(const AnnotatedLexicon* lexicon, const std::vector<std::string>& term) {
  if (!lexicon) return nullptr;
  if (const auto* whole = lexicon->find(join(term))) return whole;
  return lexicon->find(term.back());
}

} // namespace

AugmentResult augment_rare_words(const PipelineResources& res, std::span<const RareWord> rare_words,
                                 const AugmentationConfig& config, std::size_t workers) {
  config.validate();
  const auto alignments = align_corpus(res, workers);

  std::vector<SentenceVector> sentence_vectors;
  if (config.use_sent_sim) {
    sentence_vectors.resize(res.corpus.size());
    parallel_for(sentence_vectors.size(), workers, [&](std::size_t s) {
      sentence_vectors[s] = sentence_embedding(res.corpus.source[s], res.embeddings_src);
    });
  }

  std::vector<std::optional<ReplacementRecord>> early(rare_words.size());
  std::vector<ItemOutcome> outcomes(rare_words.size());
  parallel_for(rare_words.size(), workers, [&](std::size_t i) {
    const RareWord& rare = rare_words[i];
    const std::vector<std::string> surface{rare.surface};

    // Target-side translation via the alignment model.
    const auto translation = translate_rare_word(rare, res.corpus, res.alignment, config.max_span);
    if (!translation.tokens) {
      early[i] = item_rejection(ItemKind::rare_word, surface,
                                translation.failure == SpanFailure::too_long ? RejectReason::span_too_long
                                                                             : RejectReason::unaligned);
      return;
    }
    const auto vec = res.embeddings_src.find(rare.surface);
    if (!vec) {
      early[i] = item_rejection(ItemKind::rare_word, surface, RejectReason::coverage);
      return;
    }

    ItemSpec item;
    item.kind = ItemKind::rare_word;
    item.source_insert = surface;
    item.target_insert = *translation.tokens;
    item.query.assign(vec->begin(), vec->end());
    if (config.syntactic_mode() != SyntacticMode::off) {
      item.annotation = res.lexicon_src ? res.lexicon_src->find(rare.surface) : nullptr;
      if (!item.annotation) {
        early[i] = item_rejection(ItemKind::rare_word, surface, RejectReason::unannotated);
        return;
      }
    }

    // Candidate sentences, host sentences excluded.
    const std::unordered_set<std::size_t> hosts(rare.host_sentence_ids.begin(), rare.host_sentence_ids.end());
    if (config.use_sent_sim) {
      const auto host_vec = sentence_embedding(res.corpus.source[translation.host_sentence], res.embeddings_src);
      for (const auto& hit : top_k_sentences(host_vec.vector, sentence_vectors, config.sent_k, hosts)) {
        item.candidates.push_back(hit.id);
        item.candidate_sent_sims.push_back(hit.score);
      }
    } else {
      for (std::size_t s = 0; s < res.corpus.size(); ++s) {
        if (hosts.count(s)) continue;
        item.candidates.push_back(s);
        item.candidate_sent_sims.push_back(std::nullopt);
      }
    }
    outcomes[i] = process_item(item, res, alignments, config);
  });
  return assemble(early, outcomes);
}

AugmentResult augment_dictionary(const PipelineResources& res, std::span<const DictionaryEntry> dictionary,
                                 const AugmentationConfig& config, std::size_t workers) {
  config.validate();
  if (config.use_sent_sim)
    throw ConfigError("sentence-similarity filtering does not apply to dictionary augmentation; "
                      "disable use_sent_sim for dictionary mode");
  const auto alignments = align_corpus(res, workers);
  const Vocabulary training_vocab = build_vocabulary(res.corpus.source);

  std::vector<std::optional<ReplacementRecord>> early(dictionary.size());
  std::vector<ItemOutcome> outcomes(dictionary.size());
  parallel_for(dictionary.size(), workers, [&](std::size_t i) {
    const auto& entry = dictionary[i];
    if (config.dict_scope == DictionaryScope::oov_only &&
        std::all_of(entry.source_term.begin(), entry.source_term.end(),
                    [&](const std::string& t) { return training_vocab.contains(t); })) {
      early[i] = item_rejection(ItemKind::dictionary, entry.source_term, RejectReason::in_vocabulary);
      return;
    }
    const auto term_vec = term_embedding(entry.source_term, res.embeddings_src);
    if (term_vec.covered_tokens < entry.source_term.size()) {
      early[i] = item_rejection(ItemKind::dictionary, entry.source_term, RejectReason::coverage);
      return;
    }

    ItemSpec item;
    item.kind = ItemKind::dictionary;
    item.source_insert = entry.source_term;
    item.target_insert = entry.target_term;
    item.query = term_vec.vector;
    if (config.syntactic_mode() != SyntacticMode::off) {
      item.annotation = term_annotation(res.lexicon_src, entry.source_term);
      if (!item.annotation) {
        early[i] = item_rejection(ItemKind::dictionary, entry.source_term, RejectReason::unannotated);
        return;
      }
    }
    item.candidates.resize(res.corpus.size());
    for (std::size_t s = 0; s < res.corpus.size(); ++s) item.candidates[s] = s;
    item.candidate_sent_sims.assign(res.corpus.size(), std::nullopt);
    outcomes[i] = process_item(item, res, alignments, config);
  });
  return assemble(early, outcomes);
}

MergeResult merge_and_dedup(const ParallelCorpus& base, std::span<const NamedSet> sets, std::size_t soft_cap) {
  MergeResult out;
  out.corpus = base;
  out.base_pairs = base.size();

  std::unordered_set<std::string> seen;
  auto key = [](const std::vector<std::string>& s, const std::vector<std::string>& t) {
    return join(s) + '\n' + join(t);
  };
  for (std::size_t i = 0; i < base.size(); ++i) seen.insert(key(base.source[i].tokens, base.target[i].tokens));

  for (const auto& set : sets) {
    SetSummary summary{set.name, 0, 0};
    std::vector<bool> kept;
    kept.reserve(set.pairs.size());
    for (const auto& pair : set.pairs) {
      if (!seen.insert(key(pair.source_tokens, pair.target_tokens)).second) {
        ++summary.deduped;
        kept.push_back(false);
        continue;
      }
      const std::size_t id = out.corpus.size();
      out.corpus.source.push_back({id, pair.source_tokens});
      out.corpus.target.push_back({id, pair.target_tokens});
      ++summary.accepted;
      kept.push_back(true);
    }
    out.synthetic_pairs += summary.accepted;
    out.sets.push_back(std::move(summary));
    out.kept.push_back(std::move(kept));
  }
  if (out.synthetic_pairs > soft_cap)
    out.warnings.push_back("synthetic pair count " + std::to_string(out.synthetic_pairs) + " exceeds soft cap " +
                           std::to_string(soft_cap) + "; gains may diminish beyond this size");
  return out;
}

} // namespace paraug
