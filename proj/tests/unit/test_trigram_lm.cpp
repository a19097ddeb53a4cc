#include "paraug/errors.hpp"
#include "paraug/trigram_lm.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace paraug;
using paraug::test::TempDir;

namespace {

// Interpolated absolute discounting computed directly from n-gram counts kept
// in string-keyed maps; shares no code with TrigramModel.
class OracleLm {
public:
  OracleLm(const std::vector<Sentence>& mono, double d) : d_(d) {
    vocab_ = {"</s>", "<unk>"};
    for (const auto& s : mono) {
      std::vector<std::string> p{"<s>", "<s>"};
      p.insert(p.end(), s.tokens.begin(), s.tokens.end());
      p.push_back("</s>");
      for (std::size_t i = 2; i < p.size(); ++i) {
        vocab_.insert(p[i]);
        ++uni_[p[i]];
        ++n_;
        ++bi_[{p[i - 1], p[i]}];
        ++tri_[{p[i - 2], p[i - 1], p[i]}];
      }
    }
  }

  double p1(const std::string& w) const {
    const double c = uni_.count(w) ? uni_.at(w) : 0.0;
    return std::max(c - d_, 0.0) / n_ + d_ * static_cast<double>(uni_.size()) / n_ / vocab_.size();
  }
  double p2(const std::string& v, const std::string& w) const {
    double total = 0.0, types = 0.0, c = 0.0;
    for (const auto& [k, n] : bi_)
      if (k[0] == v) {
        total += n;
        types += 1;
        if (k[1] == w) c = n;
      }
    if (total == 0.0) return p1(w);
    return std::max(c - d_, 0.0) / total + d_ * types / total * p1(w);
  }
  double p3(const std::string& u, const std::string& v, const std::string& w) const {
    double total = 0.0, types = 0.0, c = 0.0;
    for (const auto& [k, n] : tri_)
      if (k[0] == u && k[1] == v) {
        total += n;
        types += 1;
        if (k[2] == w) c = n;
      }
    if (total == 0.0) return p2(v, w);
    return std::max(c - d_, 0.0) / total + d_ * types / total * p2(v, w);
  }
  const std::set<std::string>& vocab() const { return vocab_; }

private:
  double d_;
  double n_ = 0.0;
  std::set<std::string> vocab_;
  std::map<std::string, double> uni_;
  std::map<std::array<std::string, 2>, double> bi_;
  std::map<std::array<std::string, 3>, double> tri_;
};

std::vector<Sentence> abc_abd() {
  std::vector<std::string> lines;
  for (int i = 0; i < 4; ++i) lines.push_back("a b c");
  for (int i = 0; i < 4; ++i) lines.push_back("a b d");
  return test::sentences(lines);
}

// Records every trigram it is asked about; probability 1 except for tokens
// listed in `probs`.
class ScriptedLm : public LanguageModel {
public:
  std::map<std::string, double> probs;
  mutable std::vector<std::array<std::string, 3>> asked;

  double prob(std::string_view a, std::string_view b, std::string_view c) const override {
    asked.push_back({std::string(a), std::string(b), std::string(c)});
    auto it = probs.find(std::string(c));
    return it == probs.end() ? 1.0 : it->second;
  }
};

using Tri = std::array<std::string, 3>;

} // namespace

TEST_CASE("train_lm counts padded trigrams") {
  const auto model = train_lm(test::sentences({"a b c"}));
  CHECK(model.trigram_count("<s>", "<s>", "a") == 1);
  CHECK(model.trigram_count("<s>", "a", "b") == 1);
  CHECK(model.trigram_count("a", "b", "c") == 1);
  CHECK(model.trigram_count("b", "c", "</s>") == 1);
  CHECK(model.trigram_count("c", "</s>", "</s>") == 0);
  CHECK(model.unigram_count("</s>") == 1);
}

TEST_CASE("train_lm maps tokens below min_count to <unk>") {
  const auto model = train_lm(test::sentences({"a a q"}), 2);
  CHECK_FALSE(model.in_vocabulary("q"));
  CHECK(model.unigram_count("<unk>") == 1);
  CHECK(model.trigram_count("a", "a", "<unk>") == 1);
  CHECK(model.prob("a", "a", "q") == model.prob("a", "a", "<unk>"));
}

TEST_CASE("train_lm rejects an empty corpus") { CHECK_THROWS_AS(train_lm({}), std::invalid_argument); }

TEST_CASE("absolute discounting on the abc/abd corpus") {
  const auto mono = abc_abd();
  const auto model = train_lm(mono);
  const OracleLm oracle(mono, 0.75);

  // Hand derivation: P1(c) = 3.25/32 + 0.75*5/32/6, P2(c|b) = 0.40625 + 0.1875*P1(c),
  // P3(c|a,b) = 0.40625 + 0.1875*P2(c|b).
  CHECK(oracle.p1("c") == 0.12109375);
  CHECK(oracle.p2("b", "c") == 0.428955078125);
  CHECK(oracle.p3("a", "b", "c") == 0.4866790771484375);

  CHECK(model.unigram_prob("c") == doctest::Approx(oracle.p1("c")).epsilon(1e-15));
  CHECK(model.bigram_prob("b", "c") == doctest::Approx(oracle.p2("b", "c")).epsilon(1e-15));
  CHECK(model.prob("a", "b", "c") == doctest::Approx(0.4866790771484375).epsilon(1e-15));

  double sum = 0.0;
  for (const auto& w : model.predictable_tokens()) sum += model.prob("a", "b", w);
  CHECK(std::abs(sum - 1.0) < 1e-6);
  CHECK(model.prob("a", "b", "never-seen") > 0.0);
}

TEST_CASE("lm counts save/load round trip") {
  TempDir dir("lm");
  std::mt19937_64 rng(41);
  const auto model = train_lm(test::random_sentences(rng, 60, 12, 7), 2);
  save_lm_counts(dir / "m.tsv", model);
  const auto back = load_lm_counts(dir / "m.tsv");
  CHECK(back.min_count() == 2);
  CHECK(back.discount() == model.discount());
  for (const auto& u : model.vocab())
    for (const auto& w : model.predictable_tokens()) CHECK(back.prob(u, "w3", w) == model.prob(u, "w3", w));
}

TEST_CASE("window of a one-token sentence") {
  ScriptedLm lm;
  std::vector<std::string> x{"x"};
  window_score(lm, x, {0, 0});
  CHECK(lm.asked == std::vector<Tri>{{"<s>", "<s>", "x"}, {"<s>", "x", "</s>"}, {"x", "</s>", "</s>"}});

  // Golden: with a real model the score is the product of exactly these three.
  const auto model = train_lm(test::sentences({"x", "x y"}));
  const double expected = model.prob("<s>", "<s>", "x") * model.prob("<s>", "x", "</s>") * model.prob("x", "</s>", "</s>");
  CHECK(window_score(model, x, {0, 0}) == expected);
}

TEST_CASE("window trigram sets") {
  std::vector<std::string> s{"a", "b", "c", "d", "e"};
  ScriptedLm lm;
  window_score(lm, s, {1, 2});
  CHECK(lm.asked.size() == 4);
  CHECK(lm.asked.front() == Tri{"<s>", "a", "b"});
  CHECK(lm.asked.back() == Tri{"c", "d", "e"});

  const auto first = lm.asked;
  lm.asked.clear();
  window_score(lm, s, {2, 3});
  CHECK(lm.asked.size() == 4);
  CHECK(lm.asked != first);
}

TEST_CASE("lm_ratio_accept boundaries") {
  ScriptedLm lm;
  std::vector<std::string> orig{"x"};
  std::vector<std::string> synth{"y"};

  auto same = lm_ratio_accept(lm, orig, {0, 0}, orig, {0, 0}, 0.6);
  CHECK(same.accept);
  CHECK(same.ratio == 1.0);

  lm.probs["y"] = 0.59;
  auto low = lm_ratio_accept(lm, orig, {0, 0}, synth, {0, 0}, 0.6);
  CHECK_FALSE(low.accept);
  CHECK(low.ratio == doctest::Approx(0.59));

  lm.probs["y"] = 0.6;
  auto edge = lm_ratio_accept(lm, orig, {0, 0}, synth, {0, 0}, 0.6);
  CHECK(edge.ratio == 0.6);
  CHECK(edge.accept);

  CHECK_THROWS_AS(lm_ratio_accept(lm, orig, {0, 0}, synth, {0, 0}, 0.0), std::invalid_argument);
  lm.probs["x"] = 0.0;
  CHECK_THROWS_AS(lm_ratio_accept(lm, orig, {0, 0}, synth, {0, 0}, 0.6), NumericError);
}

TEST_CASE("ARPA import of a minimal file") {
  TempDir dir("arpa");
  const auto p = dir.write("m.arpa",
                           "\\data\\\nngram 1=2\n\n\\1-grams:\n-0.30103\ta\n-0.30103\t</s>\n\n\\end\\\n");
  const auto m = import_arpa(p);
  CHECK(m.order() == 1);
  CHECK(m.ngram_count(1) == 2);
  CHECK(m.prob("<s>", "<s>", "a") == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("ARPA parse errors") {
  TempDir dir("arpa");
  CHECK_THROWS_AS(import_arpa(dir.write("a.arpa", "\\data\\\nngram 1=1\n\n\\1-grams:\n-1\ta\n")), ParseError);
  CHECK_THROWS_AS(import_arpa(dir.write("b.arpa", "ngram 1=1\n\\1-grams:\n-1\ta\n\\end\\\n")), ParseError);
  CHECK_THROWS_AS(import_arpa(dir.write("c.arpa", "\\data\\\nngram 1=2\n\n\\1-grams:\n-1\ta\n\n\\end\\\n")),
                  ParseError);
  CHECK_THROWS_AS(import_arpa(dir.write("d.arpa", "\\data\\\nngram 1=1\n\n\\1-grams:\nxyz\ta\n\n\\end\\\n")),
                  ParseError);
  CHECK_THROWS_AS(import_arpa(dir / "missing.arpa"), InputError);
}

TEST_CASE("ARPA export/import agrees with the counts model") {
  TempDir dir("arpa");
  const auto mono = abc_abd();
  const auto model = train_lm(mono);
  export_arpa(model, dir / "m.arpa");
  const auto arpa = import_arpa(dir / "m.arpa");
  CHECK(arpa.order() == 3);
  std::vector<std::string> hist = model.vocab();
  hist.push_back("zzz");
  for (const auto& u : hist)
    for (const auto& v : hist)
      for (const auto& w : model.predictable_tokens())
        CHECK(std::abs(arpa.prob(u, v, w) - model.prob(u, v, w)) < 1e-4);
}

// Properties.

TEST_CASE("property: every history normalizes, including unseen ones") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t vocab = 5 + rng() % 45;  // at most 50 words
    const auto mono = test::random_sentences(rng, 30 + rng() % 200, vocab, 9);
    const auto model = train_lm(mono, 1 + trial % 2);
    auto words = model.predictable_tokens();
    auto histories = model.vocab();
    histories.push_back("never-seen");
    double worst = 0.0;
    for (const auto& u : histories)
      for (const auto& v : histories) {
        double sum = 0.0;
        for (const auto& w : words) {
          const double p = model.prob(u, v, w);
          CHECK(p > 0.0);
          CHECK(p <= 1.0);
          sum += p;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
      }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("property: library model agrees with the oracle") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 4; ++trial) {
    const auto mono = test::random_sentences(rng, 40, 8, 6);
    const auto model = train_lm(mono);
    const OracleLm oracle(mono, 0.75);
    std::vector<std::string> hist(oracle.vocab().begin(), oracle.vocab().end());
    hist.push_back("<s>");
    for (const auto& u : hist)
      for (const auto& v : hist)
        for (const auto& w : oracle.vocab())
          CHECK(model.prob(u, v, w) == doctest::Approx(oracle.p3(u, v, w)).epsilon(1e-12));
  }
}

TEST_CASE("property: a window has exactly span length + 2 trigrams and identity always passes") {
  std::mt19937_64 rng(44);
  const auto model = train_lm(test::random_sentences(rng, 50, 10, 8));
  for (int trial = 0; trial < 200; ++trial) {
    auto s = test::random_sentences(rng, 1, 12, 10)[0].tokens;
    const std::size_t a = rng() % s.size();
    const std::size_t b = a + rng() % (s.size() - a);
    ScriptedLm lm;
    window_score(lm, s, {a, b});
    CHECK(lm.asked.size() == b - a + 3);
    const auto window = make_context_window(s, {a, b});
    CHECK(overlapping_trigram_positions(window).size() == b - a + 3);

    const double t = static_cast<double>(1 + rng() % 100) / 100.0;
    CHECK(lm_ratio_accept(model, s, {a, b}, s, {a, b}, t).accept);
  }
}
