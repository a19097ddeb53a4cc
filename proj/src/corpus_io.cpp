#include "paraug/corpus_io.hpp"

#include "paraug/errors.hpp"
#include "paraug/text_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace paraug {

namespace {

std::vector<std::string_view> read_utf8_lines(const std::filesystem::path& path, std::string& storage) {
  storage = read_file(path.string());
  if (auto bad = find_invalid_utf8(storage))
    throw InputError("invalid UTF-8 in " + path.string() + " at byte offset " + std::to_string(*bad));
  return split_lines(storage);
}

} // namespace

Loaded<ParallelCorpus> load_parallel_corpus(const std::filesystem::path& source_path,
                                            const std::filesystem::path& target_path) {
  std::string src_buf, tgt_buf;
  const auto src_lines = read_utf8_lines(source_path, src_buf);
  const auto tgt_lines = read_utf8_lines(target_path, tgt_buf);
  if (src_lines.size() != tgt_lines.size())
    throw InputError("line count mismatch " + std::to_string(src_lines.size()) + " vs " +
                     std::to_string(tgt_lines.size()));

  Loaded<ParallelCorpus> out;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    auto src = split_whitespace(src_lines[i]);
    auto tgt = split_whitespace(tgt_lines[i]);
    if (src.empty() || tgt.empty()) {
      out.warnings.push_back("blank line at line " + std::to_string(i + 1) + "; pair dropped");
      continue;
    }
    const std::size_t id = out.value.source.size();
    out.value.source.push_back({id, std::move(src)});
    out.value.target.push_back({id, std::move(tgt)});
  }
  return out;
}

Loaded<std::vector<Sentence>> load_monolingual(const std::filesystem::path& path) {
  std::string buf;
  const auto lines = read_utf8_lines(path, buf);
  Loaded<std::vector<Sentence>> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto tokens = split_whitespace(lines[i]);
    if (tokens.empty()) {
      out.warnings.push_back("blank line at line " + std::to_string(i + 1) + " of " + path.string());
      continue;
    }
    out.value.push_back({out.value.size(), std::move(tokens)});
  }
  return out;
}

void write_sentences(const std::filesystem::path& path, std::span<const Sentence> sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  for (const auto& s : sentences) out << join(s.tokens) << '\n';
}

std::size_t Vocabulary::count(std::string_view token) const {
  auto it = counts.find(token);
  return it == counts.end() ? 0 : it->second;
}

Vocabulary build_vocabulary(std::span<const Sentence> side) {
  Vocabulary vocab;
  for (const auto& s : side) {
    for (const auto& tok : s.tokens) ++vocab.counts[tok];
    vocab.total_tokens += s.tokens.size();
  }
  return vocab;
}

std::vector<RareWord> extract_rare_words(const Vocabulary& vocab, std::span<const Sentence> corpus_side,
                                         std::size_t t_r, const RareWordValidity& validity) {
  if (t_r == 0) throw std::invalid_argument("rare-word threshold must be >= 1");

  std::map<std::string, RareWord, std::less<>> selected;
  for (const auto& [word, count] : vocab.counts) {
    if (count > t_r) continue;
    if (validity.reject_digits && has_ascii_digit(word)) continue;
    if (validity.reject_punctuation && is_all_punctuation(word)) continue;
    if (validity.in_embeddings && !validity.in_embeddings(word)) continue;
    if (validity.in_annotations && !validity.in_annotations(word)) continue;
    selected.emplace(word, RareWord{word, count, {}});
  }

  for (const auto& s : corpus_side) {
    for (const auto& tok : s.tokens) {
      auto it = selected.find(tok);
      if (it == selected.end()) continue;
      auto& hosts = it->second.host_sentence_ids;
      if (hosts.empty() || hosts.back() != s.id) hosts.push_back(s.id);
    }
  }

  std::vector<RareWord> out;
  out.reserve(selected.size());
  for (auto& [word, rare] : selected) {
    if (rare.host_sentence_ids.empty()) continue;
    std::sort(rare.host_sentence_ids.begin(), rare.host_sentence_ids.end());
    rare.host_sentence_ids.erase(std::unique(rare.host_sentence_ids.begin(), rare.host_sentence_ids.end()),
                                 rare.host_sentence_ids.end());
    out.push_back(std::move(rare));
  }
  return out;
}

Loaded<std::vector<DictionaryEntry>> load_dictionary(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("dictionary file not found: " + path.string());
  std::string buf = read_file(path.string());
  if (auto bad = find_invalid_utf8(buf))
    throw InputError("invalid UTF-8 in " + path.string() + " at byte offset " + std::to_string(*bad));

  Loaded<std::vector<DictionaryEntry>> out;
  std::set<DictionaryEntry> seen;
  const auto lines = split_lines(buf);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i], '\t');
    const std::string where = "dictionary line " + std::to_string(i + 1);
    if (fields.size() != 2) {
      out.warnings.push_back(where + ": expected 2 columns, got " + std::to_string(fields.size()));
      continue;
    }
    DictionaryEntry entry{split_whitespace(fields[0]), split_whitespace(fields[1])};
    if (entry.source_term.empty() || entry.target_term.empty()) {
      out.warnings.push_back(where + ": empty term");
      continue;
    }
    if (!seen.insert(entry).second) continue;
    out.value.push_back(std::move(entry));
  }
  return out;
}

namespace {

SideStats side_stats(std::span<const Sentence> side, std::size_t t_r) {
  const Vocabulary vocab = build_vocabulary(side);
  SideStats stats;
  stats.word_count = vocab.total_tokens;
  stats.unique_words = vocab.counts.size();
  for (const auto& [word, count] : vocab.counts)
    if (count <= t_r) ++stats.rare_word_count;
  return stats;
}

} // namespace

StatsReport corpus_stats(const ParallelCorpus& corpus, std::size_t t_r,
                         const std::vector<DictionaryEntry>* dictionary, const Vocabulary* reference_vocab) {
  StatsReport report;
  report.sentence_count = corpus.size();
  report.source = side_stats(corpus.source, t_r);
  report.target = side_stats(corpus.target, t_r);
  if (!dictionary) return report;

  Vocabulary own;
  if (!reference_vocab) {
    own = build_vocabulary(corpus.source);
    reference_vocab = &own;
  }
  report.dict_term_count = dictionary->size();
  for (const auto& entry : *dictionary) {
    const bool all_absent = std::none_of(entry.source_term.begin(), entry.source_term.end(),
                                         [&](const std::string& t) { return reference_vocab->contains(t); });
    if (all_absent) ++report.dict_oov_term_count;
  }
  return report;
}

std::string format_stats(const StatsReport& r) {
  std::ostringstream out;
  out << "sentence_count: " << r.sentence_count << '\n'
      << "source.word_count: " << r.source.word_count << '\n'
      << "source.unique_words: " << r.source.unique_words << '\n'
      << "source.rare_word_count: " << r.source.rare_word_count << '\n'
      << "target.word_count: " << r.target.word_count << '\n'
      << "target.unique_words: " << r.target.unique_words << '\n'
      << "target.rare_word_count: " << r.target.rare_word_count << '\n'
      << "dict_term_count: " << r.dict_term_count << '\n'
      << "dict_oov_term_count: " << r.dict_oov_term_count << '\n';
  return out.str();
}

std::string stats_to_json(const StatsReport& r) {
  auto side = [](const SideStats& s) {
    return nlohmann::ordered_json{
        {"word_count", s.word_count}, {"unique_words", s.unique_words}, {"rare_word_count", s.rare_word_count}};
  };
  nlohmann::ordered_json j{{"sentence_count", r.sentence_count},
                           {"source", side(r.source)},
                           {"target", side(r.target)},
                           {"dict_term_count", r.dict_term_count},
                           {"dict_oov_term_count", r.dict_oov_term_count}};
  return j.dump(2);
}

} // namespace paraug
