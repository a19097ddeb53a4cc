#pragma once

#include "paraug/corpus_io.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace paraug {

inline constexpr std::string_view bos_token = "<s>";
inline constexpr std::string_view eos_token = "</s>";
inline constexpr std::string_view unk_token = "<unk>";

// Conditional word probability P(w3 | w1, w2) over surface tokens.
class LanguageModel {
public:
  virtual ~LanguageModel() = default;
  virtual double prob(std::string_view w1, std::string_view w2, std::string_view w3) const = 0;
};

// Interpolated absolute discounting:
//   P(w|u,v) = max(c(u,v,w) - D, 0) / c(u,v,.) + D N1+(u,v,.) / c(u,v,.) * P(w|v)
//   P(w|v)   = max(c(v,w) - D, 0) / c(v,.)    + D N1+(v,.) / c(v,.)     * P(w)
//   P(w)     = max(c(w) - D, 0) / N           + D N1+(.) / N / |V|
// where V is the vocabulary plus </s> and <unk>. An unseen history backs off
// entirely to the next lower order.
class TrigramModel : public LanguageModel {
public:
  static constexpr double default_discount = 0.75;

  double prob(std::string_view w1, std::string_view w2, std::string_view w3) const override;

  double discount() const noexcept { return discount_; }
  std::size_t min_count() const noexcept { return min_count_; }

  // Predictable tokens: the vocabulary plus </s> and <unk> (never <s>).
  std::vector<std::string> predictable_tokens() const;
  bool in_vocabulary(std::string_view token) const;

  std::size_t unigram_count(std::string_view w) const;
  std::size_t bigram_count(std::string_view w1, std::string_view w2) const;
  std::size_t trigram_count(std::string_view w1, std::string_view w2, std::string_view w3) const;

  double unigram_prob(std::string_view w) const;
  double bigram_prob(std::string_view w1, std::string_view w2) const;

  // Count tables keyed by token id; ids index `vocab()`.
  using Bigram = std::array<std::uint32_t, 2>;
  using Trigram = std::array<std::uint32_t, 3>;
  struct KeyHash {
    template <std::size_t N>
    std::size_t operator()(const std::array<std::uint32_t, N>& k) const noexcept {
      std::uint64_t h = 1469598103934665603ull;
      for (auto x : k) h = (h ^ x) * 1099511628211ull;
      return static_cast<std::size_t>(h);
    }
  };
  struct HistoryStats {
    std::size_t total = 0;
    std::size_t types = 0;
  };

  const std::vector<std::string>& vocab() const noexcept { return names_; }
  const std::vector<std::size_t>& unigrams() const noexcept { return unigrams_; }
  const std::unordered_map<Bigram, std::size_t, KeyHash>& bigrams() const noexcept { return bigrams_; }
  const std::unordered_map<Trigram, std::size_t, KeyHash>& trigrams() const noexcept { return trigrams_; }
  HistoryStats bigram_history(std::uint32_t v) const;
  HistoryStats trigram_history(std::uint32_t u, std::uint32_t v) const;

  std::uint32_t id_of(std::string_view token) const;  // <unk> id for unknown tokens
  double prob_ids(std::uint32_t u, std::uint32_t v, std::uint32_t w) const;
  double bigram_prob_ids(std::uint32_t v, std::uint32_t w) const;
  double unigram_prob_ids(std::uint32_t w) const;

  static constexpr std::uint32_t bos_id = 0;
  static constexpr std::uint32_t eos_id = 1;
  static constexpr std::uint32_t unk_id = 2;

private:
  friend TrigramModel train_lm(std::span<const Sentence>, std::size_t, double);
  friend TrigramModel load_lm_counts(const std::filesystem::path&);

  TrigramModel(double discount, std::size_t min_count);
  std::uint32_t intern(const std::string& token);
  void finalize();

  double discount_ = default_discount;
  std::size_t min_count_ = 1;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::size_t> unigrams_;
  std::unordered_map<Bigram, std::size_t, KeyHash> bigrams_;
  std::unordered_map<Trigram, std::size_t, KeyHash> trigrams_;

  std::size_t unigram_total_ = 0;
  std::size_t unigram_types_ = 0;
  std::vector<HistoryStats> bigram_histories_;
  std::unordered_map<Bigram, HistoryStats, KeyHash> trigram_histories_;
};

// Tokens seen fewer than min_count times become <unk> before counting. Each
// sentence is padded as <s> <s> w1 ... wn </s>.
TrigramModel train_lm(std::span<const Sentence> mono, std::size_t min_count = 1,
                      double discount = TrigramModel::default_discount);

// Sorted TSV count tables with a header recording the discount and min_count.
void save_lm_counts(const std::filesystem::path& path, const TrigramModel& model);
TrigramModel load_lm_counts(const std::filesystem::path& path);

// Inclusive token range.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start + 1; }
  bool operator==(const TokenSpan&) const = default;
};

// Sentence padded as <s> <s> t0 ... tn-1 </s> </s>, with the span shifted
// into padded coordinates.
struct ContextWindow {
  std::vector<std::string> padded;
  TokenSpan span;
};

ContextWindow make_context_window(std::span<const std::string> tokens, TokenSpan span);

// Padded positions p whose trigram (p-2, p-1, p) overlaps the span:
// exactly span.length() + 2 positions.
std::vector<std::size_t> overlapping_trigram_positions(const ContextWindow& window);

// Product of P(w_p | w_p-2, w_p-1) over the overlapping trigram positions.
double window_score(const LanguageModel& model, std::span<const std::string> tokens, TokenSpan span);

struct LmVerdict {
  bool accept = false;
  double ratio = 0.0;
};

// Accepts when window_score(synthetic) / window_score(original) >= threshold.
LmVerdict lm_ratio_accept(const LanguageModel& model, std::span<const std::string> original_tokens,
                          TokenSpan original_span, std::span<const std::string> synthetic_tokens,
                          TokenSpan synthetic_span, double threshold);

inline bool ratio_passes(double ratio, double threshold) { return ratio >= threshold; }

// Backoff n-gram scorer read from an ARPA file (orders 1 to 3).
class ArpaModel : public LanguageModel {
public:
  double prob(std::string_view w1, std::string_view w2, std::string_view w3) const override;

  std::size_t order() const noexcept { return order_; }
  std::size_t ngram_count(std::size_t n) const { return n >= 1 && n <= order_ ? tables_[n - 1].size() : 0; }

private:
  friend ArpaModel import_arpa(const std::filesystem::path&);

  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;
  };

  double log10_prob(std::span<const std::string> words) const;
  const Entry* find(std::span<const std::string> words) const;

  std::size_t order_ = 0;
  std::array<std::unordered_map<std::string, Entry>, 3> tables_;
};

ArpaModel import_arpa(const std::filesystem::path& path);

// Writes the interpolated model in backoff form: every observed n-gram with
// its interpolated probability, and each history's interpolation weight as
// its backoff weight.
void export_arpa(const TrigramModel& model, const std::filesystem::path& path);

} // namespace paraug
