#include "paraug/augment_pipeline.hpp"
#include "paraug/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <map>
#include <random>
#include <set>

using namespace paraug;
using paraug::test::TempDir;

namespace {

// Every trigram scores 1, so any same-length replacement has ratio 1.
class FlatLm : public LanguageModel {
public:
  double prob(std::string_view, std::string_view, std::string_view) const override { return 1.0; }
};

EmbeddingTable table_of(const std::map<std::string, std::vector<double>>& rows) {
  EmbeddingTable t(rows.begin()->second.size());
  for (const auto& [w, v] : rows) t.add(w, v);
  return t;
}

TokenAnnotation noun() { return {"NOUN", {{"Number", "Sing"}}}; }

// Source "the ledger" hosts the rare word; "the book ." and "my book" are
// candidates whose "book" sits next to "ledger" in embedding space.
struct LedgerFixture {
  TempDir dir{"pipe"};
  ParallelCorpus corpus = test::parallel({{"the ledger", "das kontobuch"},
                                          {"the book .", "das buch ."},
                                          {"a cat", "eine katze"},
                                          {"my book", "mein buch"}});
  EmbeddingTable emb = table_of({{"ledger", {1.0, 0.05, 0.0}},
                                 {"book", {1.0, 0.0, 0.0}},
                                 {"the", {0.0, 1.0, 0.0}},
                                 {"a", {0.0, 1.0, 0.1}},
                                 {"my", {0.0, 0.9, 0.2}},
                                 {"cat", {0.0, 0.7, 0.7}}});
  TranslationTable table = load_translation_table(dir.write("t.tsv",
                                                            "#direction\tsrc_given_tgt\n"
                                                            "das\tthe\t1\n"
                                                            "kontobuch\tledger\t1\n"
                                                            "buch\tbook\t1\n"
                                                            ".\t.\t1\n"
                                                            "eine\ta\t1\n"
                                                            "katze\tcat\t1\n"
                                                            "mein\tmy\t1\n"));
  FlatLm lm;
  AnnotatedLexicon lexicon;
  std::vector<RareWord> rare{{"ledger", 1, {0}}};

  LedgerFixture() {
    lexicon.add("ledger", noun());
    lexicon.add("book", noun());
    lexicon.add("cat", noun());
    lexicon.add("my", {"DET", {}});
  }
  PipelineResources resources() const { return {corpus, emb, table, lm, lm, &lexicon}; }
};

std::size_t count_reason(const AugmentResult& r, RejectReason reason) {
  std::size_t n = 0;
  for (const auto& rec : r.rejected) n += rec.rejection == reason;
  return n;
}

} // namespace

TEST_CASE("rare word replaces the most similar word on both sides") {
  LedgerFixture f;
  AugmentationConfig config;
  const auto r = augment_rare_words(f.resources(), f.rare, config);
  REQUIRE(r.accepted.size() == 2);
  const auto& first = r.accepted[0];
  CHECK(first.source_tokens == std::vector<std::string>{"the", "ledger", "."});
  CHECK(first.target_tokens == std::vector<std::string>{"das", "kontobuch", "."});
  CHECK(*first.record.base_sentence_id == 1);
  CHECK(first.record.source_replaced == std::vector<std::string>{"book"});
  CHECK(first.record.target_replaced == std::vector<std::string>{"buch"});
  CHECK(*first.record.word_sim > 0.99);
  CHECK(*first.record.lm_ratio_src == 1.0);
  CHECK(*first.record.lm_ratio_tgt == 1.0);
  CHECK(first.record.syntactic->reason == "disabled");
  CHECK_FALSE(first.record.sent_sim);
  CHECK_FALSE(first.record.rejection);
  // "cat" is the best word of sentence 2 but far below word_sim_min.
  CHECK(count_reason(r, RejectReason::word_sim) == 1);
}

TEST_CASE("max_per_item keeps the higher-ranked candidate") {
  LedgerFixture f;
  AugmentationConfig config;
  config.max_per_item = 1;
  const auto r = augment_rare_words(f.resources(), f.rare, config);
  REQUIRE(r.accepted.size() == 1);
  CHECK(*r.accepted[0].record.base_sentence_id == 1);
}

TEST_CASE("POS mismatch rejects with reason pos") {
  LedgerFixture f;
  AnnotatedLexicon lex;
  lex.add("ledger", noun());
  lex.add("book", {"VERB", {}});
  const PipelineResources res{f.corpus, f.emb, f.table, f.lm, f.lm, &lex};
  AugmentationConfig config;
  config.use_pos = true;
  const auto r = augment_rare_words(res, f.rare, config);
  CHECK(r.accepted.empty());
  CHECK(count_reason(r, RejectReason::pos) == 2);
  for (const auto& rec : r.rejected)
    if (rec.rejection == RejectReason::pos) {
      CHECK(rec.syntactic == SyntacticVerdict{false, "pos"});
      CHECK_FALSE(rec.lm_ratio_src);  // later gates never ran
      CHECK_FALSE(rec.target_span);
    }
}

TEST_CASE("morphology and annotation gaps are reason-coded") {
  LedgerFixture f;
  AugmentationConfig config;
  config.use_pos = true;
  config.use_morph = true;
  SUBCASE("number conflict") {
    AnnotatedLexicon lex;
    lex.add("ledger", noun());
    lex.add("book", {"NOUN", {{"Number", "Plur"}}});
    const PipelineResources res{f.corpus, f.emb, f.table, f.lm, f.lm, &lex};
    CHECK(count_reason(augment_rare_words(res, f.rare, config), RejectReason::morph) == 2);
  }
  SUBCASE("unannotated candidate") {
    AnnotatedLexicon lex;
    lex.add("ledger", noun());
    const PipelineResources res{f.corpus, f.emb, f.table, f.lm, f.lm, &lex};
    CHECK(count_reason(augment_rare_words(res, f.rare, config), RejectReason::unannotated) == 2);
  }
  SUBCASE("unannotated rare word") {
    const PipelineResources res{f.corpus, f.emb, f.table, f.lm, f.lm, nullptr};
    const auto r = augment_rare_words(res, f.rare, config);
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].rejection == RejectReason::unannotated);
    CHECK_FALSE(r.rejected[0].base_sentence_id);
  }
}

TEST_CASE("rare word without a vector or alignment is dropped") {
  LedgerFixture f;
  AugmentationConfig config;
  std::vector<RareWord> missing{{"cat", 1, {2}}};
  EmbeddingTable emb = table_of({{"book", {1.0, 0.0}}});
  const PipelineResources res{f.corpus, emb, f.table, f.lm, f.lm, nullptr};
  const auto r = augment_rare_words(res, missing, config);
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].rejection == RejectReason::coverage);

  const auto unaligned = load_translation_table(f.dir.write("u.tsv", "#direction\tsrc_given_tgt\ndas\tthe\t1\n"));
  const PipelineResources res2{f.corpus, f.emb, unaligned, f.lm, f.lm, nullptr};
  const auto r2 = augment_rare_words(res2, f.rare, config);
  REQUIRE(r2.rejected.size() == 1);
  CHECK(r2.rejected[0].rejection == RejectReason::unaligned);
}

TEST_CASE("sentence similarity restricts the candidate list") {
  LedgerFixture f;
  AugmentationConfig config;
  config.use_sent_sim = true;
  config.sent_k = 1;
  const auto r = augment_rare_words(f.resources(), f.rare, config);
  // Host "the ledger" is closest to "the book ." among non-host sentences.
  REQUIRE(r.accepted.size() == 1);
  CHECK(*r.accepted[0].record.base_sentence_id == 1);
  CHECK(r.accepted[0].record.sent_sim.has_value());
  CHECK(r.rejected.empty());
}

// Dictionary fixture: "statement" is the target of the two-word term.
struct DictFixture {
  TempDir dir{"dict"};
  ParallelCorpus corpus = test::parallel({{"the statement .", "die erklaerung ."}, {"the cat .", "die katze ."}});
  EmbeddingTable emb = table_of({{"annual", {0.9, 0.3, 0.0}},
                                 {"report", {1.0, -0.1, 0.0}},
                                 {"statement", {1.0, 0.1, 0.0}},
                                 {"the", {0.0, 1.0, 0.0}},
                                 {"cat", {0.0, 0.0, 1.0}}});
  TranslationTable table = load_translation_table(dir.write("t.tsv",
                                                            "#direction\tsrc_given_tgt\n"
                                                            "die\tthe\t1\n"
                                                            "erklaerung\tstatement\t1\n"
                                                            ".\t.\t1\n"
                                                            "katze\tcat\t1\n"));
  FlatLm lm;
  PipelineResources resources() const { return {corpus, emb, table, lm, lm, nullptr}; }
};

TEST_CASE("dictionary term inserts multiple tokens") {
  DictFixture f;
  AugmentationConfig config;
  const std::vector<DictionaryEntry> dict{{{"annual", "report"}, {"jahres", "bericht"}}};
  const auto r = augment_dictionary(f.resources(), dict, config);
  REQUIRE(r.accepted.size() == 1);
  const auto& p = r.accepted[0];
  CHECK(p.source_tokens == std::vector<std::string>{"the", "annual", "report", "."});
  CHECK(p.target_tokens == std::vector<std::string>{"die", "jahres", "bericht", "."});
  CHECK(p.record.source_inserted.size() == 2);
  CHECK(p.record.item_kind == ItemKind::dictionary);
  CHECK(p.record.source_replaced == std::vector<std::string>{"statement"});
}

TEST_CASE("dictionary coverage, scope and sentence-similarity refusal") {
  DictFixture f;
  AugmentationConfig config;
  const std::vector<DictionaryEntry> missing{{{"solar", "report"}, {"x"}}};
  const auto r = augment_dictionary(f.resources(), missing, config);
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].rejection == RejectReason::coverage);

  config.dict_scope = DictionaryScope::oov_only;
  const std::vector<DictionaryEntry> known{{{"cat"}, {"mieze"}}, {{"annual", "report"}, {"jahres", "bericht"}}};
  const auto scoped = augment_dictionary(f.resources(), known, config);
  REQUIRE_FALSE(scoped.rejected.empty());
  CHECK(scoped.rejected[0].rejection == RejectReason::in_vocabulary);
  CHECK(scoped.rejected[0].item_surface == std::vector<std::string>{"cat"});
  CHECK(scoped.accepted.size() == 1);

  config.use_sent_sim = true;
  CHECK_THROWS_AS(augment_dictionary(f.resources(), known, config), ConfigError);
}

TEST_CASE("apply_replacement splices") {
  const Sentence a{0, {"a", "b", "c"}};
  const Sentence t{0, {"x", "y"}};
  CHECK(apply_replacement(a, t, {1, 1}, {"X"}, {0, 0}, {"z"}).source_tokens ==
        std::vector<std::string>{"a", "X", "c"});
  CHECK(apply_replacement(a, t, {1, 1}, {"X", "Y"}, {0, 0}, {"z"}).source_tokens.size() == 4);
  CHECK(apply_replacement(a, t, {0, 2}, {"Y"}, {0, 1}, {"z"}).source_tokens == std::vector<std::string>{"Y"});
  CHECK(a.tokens == std::vector<std::string>{"a", "b", "c"});
  CHECK_THROWS_AS(apply_replacement(a, t, {2, 1}, {"X"}, {0, 0}, {"z"}), std::logic_error);
  CHECK_THROWS_AS(apply_replacement(a, t, {1, 3}, {"X"}, {0, 0}, {"z"}), std::logic_error);
  CHECK_THROWS_AS(apply_replacement(a, t, {1, 1}, {}, {0, 0}, {"z"}), std::logic_error);
}

TEST_CASE("merge_and_dedup") {
  const auto base = test::parallel({{"a", "x"}, {"b", "y"}});
  const SyntheticPair novel{{"c"}, {"z"}, {}};
  const SyntheticPair copy{{"a"}, {"x"}, {}};

  std::vector<SyntheticPair> one{novel};
  std::vector<NamedSet> sets{{"rare_words", one}};
  auto m = merge_and_dedup(base, sets);
  CHECK(m.corpus.size() == 3);
  CHECK(m.sets[0].accepted == 1);
  CHECK(m.sets[0].deduped == 0);

  std::vector<SyntheticPair> dup{copy};
  sets = {{"rare_words", dup}};
  m = merge_and_dedup(base, sets);
  CHECK(m.corpus.size() == 2);
  CHECK(m.sets[0].deduped == 1);
  CHECK(m.kept[0] == std::vector<bool>{false});

  sets = {{"rare_words", one}, {"dictionary", one}};
  m = merge_and_dedup(base, sets);
  CHECK(m.corpus.size() == 3);
  CHECK(m.sets[1].deduped == 1);
  CHECK(m.warnings.empty());
  CHECK(merge_and_dedup(base, sets, 0).warnings.size() == 1);
}

TEST_CASE("ablation presets and config validation") {
  AugmentationConfig c;
  apply_ablation_preset(c, "wordSim_sentSim_pos_morph");
  CHECK(c.use_word_sim);
  CHECK(c.use_sent_sim);
  CHECK(c.syntactic_mode() == SyntacticMode::pos_morph);
  CHECK_THROWS_AS(apply_ablation_preset(c, "everything"), ConfigError);

  AugmentationConfig bad;
  bad.use_morph = true;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.lm_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.t_r = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  for (auto r : all_reject_reasons()) CHECK(parse_reject_reason(to_string(r)) == r);
}

// Properties over generated fixtures: parallel corpora with a word-for-word
// target language, random vectors and a random two-tag lexicon.

namespace {

struct RandomFixture {
  ParallelCorpus corpus;
  EmbeddingTable emb{4};
  TranslationTable table;
  TrigramModel lm_src;
  TrigramModel lm_tgt;
  AnnotatedLexicon lexicon;
  std::vector<RareWord> rare;

  explicit RandomFixture(std::uint64_t seed)
      : corpus(make_corpus(seed)), table(train_ibm1(corpus, 5)), lm_src(train_lm(corpus.source)),
        lm_tgt(train_lm(corpus.target)) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> g;
    const auto vocab = build_vocabulary(corpus.source);
    for (const auto& [w, c] : vocab.counts) {
      std::vector<double> v(4);
      for (auto& x : v) x = g(rng);
      emb.add(w, v);
      if (rng() % 8 != 0)
        lexicon.add(w, {rng() % 3 ? "NOUN" : "VERB", {{"Number", rng() % 2 ? "Sing" : "Plur"}}});
    }
    rare = extract_rare_words(vocab, corpus.source, 1, RareWordValidity::none());
  }

  static ParallelCorpus make_corpus(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ParallelCorpus c;
    // Digits would make every token ineligible, so spell indices in letters.
    auto letters = [](const std::string& w) {
      std::string out;
      for (char ch : w.substr(1)) out += static_cast<char>('a' + (ch - '0'));
      return out;
    };
    c.source = test::random_sentences(rng, 40, 60, 7);
    for (auto& s : c.source) {
      Sentence t{s.id, {}};
      for (auto& w : s.tokens) {
        w = letters(w);
        t.tokens.push_back("t" + w);
      }
      c.target.push_back(std::move(t));
    }
    return c;
  }

  PipelineResources resources() const { return {corpus, emb, table, lm_src, lm_tgt, &lexicon}; }
};

std::size_t accepted_with(const RandomFixture& f, std::string_view preset, std::size_t workers = 1) {
  AugmentationConfig c;
  c.lm_threshold = 0.3;
  apply_ablation_preset(c, preset);
  return augment_rare_words(f.resources(), f.rare, c, workers).accepted.size();
}

} // namespace

TEST_CASE("property: enabling a gate never increases the accepted count") {
  const std::vector<std::pair<std::string, std::string>> looser_stricter{
      {"off", "wordSim"},
      {"off", "pos"},
      {"pos", "pos_morph"},
      {"wordSim", "wordSim_pos"},
      {"wordSim_pos", "wordSim_pos_morph"},
      {"pos_morph", "wordSim_pos_morph"},
      {"wordSim", "wordSim_sentSim"},
      {"wordSim_sentSim", "wordSim_sentSim_pos_morph"},
      {"wordSim_pos_morph", "wordSim_sentSim_pos_morph"}};
  std::size_t nonzero = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const RandomFixture f(seed);
    std::map<std::string, std::size_t> counts;
    for (const auto& p : ablation_presets()) counts[p] = accepted_with(f, p);
    nonzero += counts["off"] > 0;
    for (const auto& [lo, hi] : looser_stricter) CHECK(counts[hi] <= counts[lo]);
  }
  CHECK(nonzero > 0);  // the generator must exercise the gates
}

TEST_CASE("property: accepted pairs splice back to their base and respect every gate") {
  for (std::uint64_t seed = 11; seed <= 16; ++seed) {
    const RandomFixture f(seed);
    for (const auto& preset : ablation_presets()) {
      AugmentationConfig c;
      c.lm_threshold = 0.3;
      c.max_per_item = 2;
      apply_ablation_preset(c, preset);
      const auto r = augment_rare_words(f.resources(), f.rare, c);
      std::map<std::string, std::size_t> per_item;
      for (const auto& p : r.accepted) {
        const auto& rec = p.record;
        ++per_item[rec.item_surface[0]];
        const auto& base_src = f.corpus.source[*rec.base_sentence_id].tokens;
        const auto& base_tgt = f.corpus.target[*rec.base_sentence_id].tokens;

        auto restore = [](std::vector<std::string> s, TokenSpan span, std::size_t inserted,
                          const std::vector<std::string>& replaced) {
          s.erase(s.begin() + static_cast<std::ptrdiff_t>(span.start),
                  s.begin() + static_cast<std::ptrdiff_t>(span.start + inserted));
          s.insert(s.begin() + static_cast<std::ptrdiff_t>(span.start), replaced.begin(), replaced.end());
          return s;
        };
        CHECK(restore(p.source_tokens, *rec.source_span, rec.source_inserted.size(), rec.source_replaced) ==
              base_src);
        CHECK(restore(p.target_tokens, *rec.target_span, rec.target_inserted.size(), rec.target_replaced) ==
              base_tgt);

        if (c.use_word_sim) CHECK(*rec.word_sim >= c.word_sim_min);
        CHECK(*rec.lm_ratio_src >= c.lm_threshold);
        CHECK(*rec.lm_ratio_tgt >= c.lm_threshold);
        if (c.use_pos)
          CHECK(syntactic_ok(c.source_role, *f.lexicon.find(rec.item_surface[0]),
                             *f.lexicon.find(rec.source_replaced[0]), c.syntactic_mode()));
        if (c.use_sent_sim) CHECK(rec.sent_sim.has_value());
      }
      for (const auto& [w, n] : per_item) CHECK(n <= c.max_per_item);
      for (const auto& rec : r.rejected) CHECK(rec.rejection.has_value());
    }
  }
}

TEST_CASE("property: output does not depend on the worker count") {
  for (std::uint64_t seed = 21; seed <= 24; ++seed) {
    const RandomFixture f(seed);
    AugmentationConfig c;
    c.lm_threshold = 0.3;
    const auto one = augment_rare_words(f.resources(), f.rare, c, 1);
    const auto many = augment_rare_words(f.resources(), f.rare, c, 4);
    REQUIRE(one.accepted.size() == many.accepted.size());
    for (std::size_t i = 0; i < one.accepted.size(); ++i) {
      CHECK(one.accepted[i].source_tokens == many.accepted[i].source_tokens);
      CHECK(one.accepted[i].record == many.accepted[i].record);
    }
    CHECK(one.rejected == many.rejected);
  }
}

TEST_CASE("property: merged corpus has no duplicate pairs and keeps the base first") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto base_src = test::random_sentences(rng, 1 + rng() % 6, 3, 2);
    const auto base_tgt = test::random_sentences(rng, base_src.size(), 3, 2);
    ParallelCorpus base{base_src, base_tgt};
    std::vector<std::vector<SyntheticPair>> raw(2);
    for (auto& set : raw)
      for (std::size_t i = rng() % 8; i > 0; --i)
        set.push_back({test::random_sentences(rng, 1, 3, 2)[0].tokens, test::random_sentences(rng, 1, 3, 2)[0].tokens,
                       {}});
    const std::vector<NamedSet> sets{{"a", raw[0]}, {"b", raw[1]}};
    const auto m = merge_and_dedup(base, sets);
    std::set<std::pair<std::vector<std::string>, std::vector<std::string>>> seen;
    for (std::size_t i = 0; i < m.corpus.size(); ++i) {
      const bool fresh = seen.insert({m.corpus.source[i].tokens, m.corpus.target[i].tokens}).second;
      if (i < base.size())
        CHECK(m.corpus.source[i].tokens == base.source[i].tokens);
      else
        CHECK(fresh);
    }
    CHECK(m.corpus.size() == base.size() + m.synthetic_pairs);
    CHECK(m.sets[0].accepted + m.sets[0].deduped == raw[0].size());
    CHECK(m.sets[1].accepted + m.sets[1].deduped == raw[1].size());
  }
}
