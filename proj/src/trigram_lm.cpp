#include "paraug/trigram_lm.hpp"

#include "paraug/errors.hpp"
#include "paraug/text_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <stdexcept>
#include <tuple>

namespace paraug {

TrigramModel::TrigramModel(double discount, std::size_t min_count) : discount_(discount), min_count_(min_count) {
  if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  intern(std::string(bos_token));
  intern(std::string(eos_token));
  intern(std::string(unk_token));
}

std::uint32_t TrigramModel::intern(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, static_cast<std::uint32_t>(names_.size()));
  if (inserted) {
    names_.push_back(token);
    unigrams_.push_back(0);
  }
  return it->second;
}

void TrigramModel::finalize() {
  unigram_total_ = 0;
  unigram_types_ = 0;
  for (std::size_t w = 0; w < unigrams_.size(); ++w) {
    unigram_total_ += unigrams_[w];
    if (unigrams_[w] > 0) ++unigram_types_;
  }
  bigram_histories_.assign(names_.size(), {});
  for (const auto& [k, c] : bigrams_) {
    auto& h = bigram_histories_[k[0]];
    h.total += c;
    ++h.types;
  }
  trigram_histories_.clear();
  for (const auto& [k, c] : trigrams_) {
    auto& h = trigram_histories_[{k[0], k[1]}];
    h.total += c;
    ++h.types;
  }
}

std::uint32_t TrigramModel::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? unk_id : it->second;
}

bool TrigramModel::in_vocabulary(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

std::vector<std::string> TrigramModel::predictable_tokens() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (i != bos_id) out.push_back(names_[i]);
  return out;
}

TrigramModel::HistoryStats TrigramModel::bigram_history(std::uint32_t v) const {
  return v < bigram_histories_.size() ? bigram_histories_[v] : HistoryStats{};
}

TrigramModel::HistoryStats TrigramModel::trigram_history(std::uint32_t u, std::uint32_t v) const {
  auto it = trigram_histories_.find({u, v});
  return it == trigram_histories_.end() ? HistoryStats{} : it->second;
}

double TrigramModel::unigram_prob_ids(std::uint32_t w) const {
  const double n = static_cast<double>(unigram_total_);
  const double vocab_size = static_cast<double>(names_.size() - 1);
  const double c = w == bos_id ? 0.0 : static_cast<double>(unigrams_[w]);
  return std::max(c - discount_, 0.0) / n + discount_ * static_cast<double>(unigram_types_) / n / vocab_size;
}

double TrigramModel::bigram_prob_ids(std::uint32_t v, std::uint32_t w) const {
  const auto h = bigram_history(v);
  if (h.total == 0) return unigram_prob_ids(w);
  auto it = bigrams_.find({v, w});
  const double c = it == bigrams_.end() ? 0.0 : static_cast<double>(it->second);
  const double total = static_cast<double>(h.total);
  return std::max(c - discount_, 0.0) / total +
         discount_ * static_cast<double>(h.types) / total * unigram_prob_ids(w);
}

double TrigramModel::prob_ids(std::uint32_t u, std::uint32_t v, std::uint32_t w) const {
  const auto h = trigram_history(u, v);
  if (h.total == 0) return bigram_prob_ids(v, w);
  auto it = trigrams_.find({u, v, w});
  const double c = it == trigrams_.end() ? 0.0 : static_cast<double>(it->second);
  const double total = static_cast<double>(h.total);
  return std::max(c - discount_, 0.0) / total +
         discount_ * static_cast<double>(h.types) / total * bigram_prob_ids(v, w);
}

double TrigramModel::prob(std::string_view w1, std::string_view w2, std::string_view w3) const {
  return prob_ids(id_of(w1), id_of(w2), id_of(w3));
}

double TrigramModel::unigram_prob(std::string_view w) const { return unigram_prob_ids(id_of(w)); }

double TrigramModel::bigram_prob(std::string_view w1, std::string_view w2) const {
  return bigram_prob_ids(id_of(w1), id_of(w2));
}

std::size_t TrigramModel::unigram_count(std::string_view w) const {
  auto it = ids_.find(std::string(w));
  return it == ids_.end() ? 0 : unigrams_[it->second];
}

std::size_t TrigramModel::bigram_count(std::string_view w1, std::string_view w2) const {
  auto it = bigrams_.find({id_of(w1), id_of(w2)});
  return it == bigrams_.end() ? 0 : it->second;
}

std::size_t TrigramModel::trigram_count(std::string_view w1, std::string_view w2, std::string_view w3) const {
  auto it = trigrams_.find({id_of(w1), id_of(w2), id_of(w3)});
  return it == trigrams_.end() ? 0 : it->second;
}

TrigramModel train_lm(std::span<const Sentence> mono, std::size_t min_count, double discount) {
  if (mono.empty()) throw std::invalid_argument("train_lm: empty monolingual corpus");
  if (min_count == 0) throw std::invalid_argument("train_lm: min_count must be >= 1");

  std::map<std::string, std::size_t> freq;
  for (const auto& s : mono)
    for (const auto& tok : s.tokens) ++freq[tok];

  TrigramModel model(discount, min_count);
  for (const auto& [tok, c] : freq)
    if (c >= min_count) model.intern(tok);

  std::vector<std::uint32_t> padded;
  for (const auto& s : mono) {
    padded.assign(2, TrigramModel::bos_id);
    for (const auto& tok : s.tokens) padded.push_back(model.id_of(tok));
    padded.push_back(TrigramModel::eos_id);
    for (std::size_t p = 2; p < padded.size(); ++p) {
      ++model.unigrams_[padded[p]];
      ++model.bigrams_[{padded[p - 1], padded[p]}];
      ++model.trigrams_[{padded[p - 2], padded[p - 1], padded[p]}];
    }
  }
  model.finalize();
  return model;
}

void save_lm_counts(const std::filesystem::path& path, const TrigramModel& model) {
  const auto& names = model.vocab();
  std::vector<std::pair<std::string, std::size_t>> uni, bi, tri;
  for (std::size_t w = 0; w < names.size(); ++w)
    if (model.unigrams()[w] > 0) uni.emplace_back(names[w], model.unigrams()[w]);
  for (const auto& [k, c] : model.bigrams()) bi.emplace_back(names[k[0]] + ' ' + names[k[1]], c);
  for (const auto& [k, c] : model.trigrams()) tri.emplace_back(names[k[0]] + ' ' + names[k[1]] + ' ' + names[k[2]], c);
  std::sort(uni.begin(), uni.end());
  std::sort(bi.begin(), bi.end());
  std::sort(tri.begin(), tri.end());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << "#trigram-counts\tdiscount=" << std::setprecision(17) << model.discount() << "\tmin_count=" << model.min_count() << '\n';
  for (const auto& [k, c] : uni) out << "1\t" << k << '\t' << c << '\n';
  for (const auto& [k, c] : bi) out << "2\t" << k << '\t' << c << '\n';
  for (const auto& [k, c] : tri) out << "3\t" << k << '\t' << c << '\n';
}

TrigramModel load_lm_counts(const std::filesystem::path& path) {
  const std::string buf = read_file(path.string());
  const auto lines = split_lines(buf);
  if (lines.empty()) throw ParseError("empty LM count file " + path.string());

  const auto header = split_fields(lines[0], '\t');
  double discount = 0.0;
  std::size_t min_count = 0;
  if (header.size() != 3 || header[0] != "#trigram-counts" || header[1].rfind("discount=", 0) != 0 ||
      header[2].rfind("min_count=", 0) != 0)
    throw ParseError("bad LM count header", 1);
  try {
    discount = std::stod(header[1].substr(9));
    min_count = std::stoul(header[2].substr(10));
  } catch (const std::exception&) {
    throw ParseError("bad LM count header values", 1);
  }

  TrigramModel model(discount, min_count);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i], '\t');
    if (fields.size() != 3) throw ParseError("LM count row needs 3 columns", i + 1);
    const auto words = split_whitespace(fields[1]);
    std::size_t count = 0;
    auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), count);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size())
      throw ParseError("bad count '" + fields[2] + "'", i + 1);
    std::vector<std::uint32_t> ids;
    for (const auto& w : words) ids.push_back(model.intern(w));
    if (fields[0] == "1" && ids.size() == 1)
      model.unigrams_[ids[0]] = count;
    else if (fields[0] == "2" && ids.size() == 2)
      model.bigrams_[{ids[0], ids[1]}] = count;
    else if (fields[0] == "3" && ids.size() == 3)
      model.trigrams_[{ids[0], ids[1], ids[2]}] = count;
    else
      throw ParseError("bad n-gram row", i + 1);
  }
  model.finalize();
  return model;
}

ContextWindow make_context_window(std::span<const std::string> tokens, TokenSpan span) {
  if (span.start > span.end || span.end >= tokens.size())
    throw std::invalid_argument("context window span out of range");
  ContextWindow w;
  w.padded.reserve(tokens.size() + 4);
  w.padded.emplace_back(bos_token);
  w.padded.emplace_back(bos_token);
  w.padded.insert(w.padded.end(), tokens.begin(), tokens.end());
  w.padded.emplace_back(eos_token);
  w.padded.emplace_back(eos_token);
  w.span = {span.start + 2, span.end + 2};
  return w;
}

std::vector<std::size_t> overlapping_trigram_positions(const ContextWindow& window) {
  std::vector<std::size_t> out;
  const std::size_t last = std::min(window.span.end + 2, window.padded.size() - 1);
  for (std::size_t p = std::max<std::size_t>(window.span.start, 2); p <= last; ++p) out.push_back(p);
  return out;
}

double window_score(const LanguageModel& model, std::span<const std::string> tokens, TokenSpan span) {
  const auto window = make_context_window(tokens, span);
  double score = 1.0;
  for (auto p : overlapping_trigram_positions(window))
    score *= model.prob(window.padded[p - 2], window.padded[p - 1], window.padded[p]);
  return score;
}

LmVerdict lm_ratio_accept(const LanguageModel& model, std::span<const std::string> original_tokens,
                          TokenSpan original_span, std::span<const std::string> synthetic_tokens,
                          TokenSpan synthetic_span, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("LM ratio threshold must be > 0");
  const double original = window_score(model, original_tokens, original_span);
  if (!(original > 0.0)) throw NumericError("original context window scored zero");
  const double synthetic = window_score(model, synthetic_tokens, synthetic_span);
  const double ratio = synthetic / original;
  return {ratio_passes(ratio, threshold), ratio};
}

} // namespace paraug
