#include "paraug/errors.hpp"
#include "paraug/text_util.hpp"
#include "paraug/trigram_lm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace paraug {

namespace {

std::string key_of(std::span<const std::string> words) {
  std::string k;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) k += ' ';
    k += words[i];
  }
  return k;
}

bool parse_log(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

} // namespace

const ArpaModel::Entry* ArpaModel::find(std::span<const std::string> words) const {
  if (words.empty() || words.size() > order_) return nullptr;
  const auto& table = tables_[words.size() - 1];
  auto it = table.find(key_of(words));
  return it == table.end() ? nullptr : &it->second;
}

double ArpaModel::log10_prob(std::span<const std::string> words) const {
  if (words.size() > order_) words = words.subspan(words.size() - order_);
  if (const auto* e = find(words)) return e->log10_prob;
  if (words.size() == 1) {
    const std::string unk(unk_token);
    const auto* e = find(std::span<const std::string>(&unk, 1));
    return e ? e->log10_prob : -99.0;
  }
  const auto* history = find(words.first(words.size() - 1));
  const double backoff = history ? history->log10_backoff : 0.0;
  return backoff + log10_prob(words.subspan(1));
}

double ArpaModel::prob(std::string_view w1, std::string_view w2, std::string_view w3) const {
  std::array<std::string, 3> words{std::string(w1), std::string(w2), std::string(w3)};
  for (auto& w : words) {
    const auto* e = find(std::span<const std::string>(&w, 1));
    if (!e) w = unk_token;
  }
  return std::pow(10.0, log10_prob(words));
}

ArpaModel import_arpa(const std::filesystem::path& path) {
  const std::string buf = read_file(path.string());
  const auto lines = split_lines(buf);

  ArpaModel model;
  std::array<std::size_t, 3> declared{0, 0, 0};
  std::size_t i = 0;
  while (i < lines.size() && lines[i] != "\\data\\") ++i;
  if (i == lines.size()) throw ParseError("missing \\data\\ header in " + path.string());
  ++i;

  for (; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.empty()) continue;
    if (line.rfind("ngram ", 0) != 0) break;
    const auto eq = line.find('=');
    std::size_t n = 0, count = 0;
    const auto spec = line.substr(6, eq == std::string_view::npos ? std::string_view::npos : eq - 6);
    if (eq == std::string_view::npos ||
        std::from_chars(spec.data(), spec.data() + spec.size(), n).ec != std::errc() ||
        std::from_chars(line.data() + eq + 1, line.data() + line.size(), count).ec != std::errc())
      throw ParseError("malformed ngram count line", i + 1);
    if (n < 1 || n > 3) throw ParseError("unsupported n-gram order " + std::to_string(n), i + 1);
    declared[n - 1] = count;
    model.order_ = std::max(model.order_, n);
  }
  if (model.order_ == 0) throw ParseError("no ngram counts declared", i + 1);

  bool ended = false;
  std::size_t current = 0;
  std::size_t section_start = 0;
  auto close_section = [&](std::size_t line_no) {
    if (current == 0) return;
    if (model.tables_[current - 1].size() != declared[current - 1])
      throw ParseError("count mismatch for " + std::to_string(current) + "-grams: declared " +
                           std::to_string(declared[current - 1]) + ", found " +
                           std::to_string(model.tables_[current - 1].size()) + " (section starting line " +
                           std::to_string(section_start) + ")",
                       line_no);
  };

  for (; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.empty()) continue;
    if (line.front() == '\\') {
      close_section(i + 1);
      if (line == "\\end\\") {
        ended = true;
        break;
      }
      std::size_t n = 0;
      if (line.size() == 9 && line.substr(2) == "-grams:" && line[1] >= '1' && line[1] <= '3')
        n = static_cast<std::size_t>(line[1] - '0');
      if (n == 0 || n > model.order_) throw ParseError("malformed section header '" + std::string(line) + "'", i + 1);
      current = n;
      section_start = i + 1;
      continue;
    }
    if (current == 0) throw ParseError("n-gram entry outside a section", i + 1);
    const auto fields = split_whitespace(line);
    if (fields.size() != current + 1 && fields.size() != current + 2)
      throw ParseError("malformed " + std::to_string(current) + "-gram entry", i + 1);
    ArpaModel::Entry entry;
    if (!parse_log(fields[0], entry.log10_prob)) throw ParseError("bad log probability", i + 1);
    if (fields.size() == current + 2 && !parse_log(fields.back(), entry.log10_backoff))
      throw ParseError("bad backoff weight", i + 1);
    const std::vector<std::string> words(fields.begin() + 1, fields.begin() + 1 + static_cast<std::ptrdiff_t>(current));
    model.tables_[current - 1][key_of(words)] = entry;
  }
  if (!ended) throw ParseError("missing \\end\\ marker in " + path.string(), lines.size());
  return model;
}

void export_arpa(const TrigramModel& model, const std::filesystem::path& path) {
  const auto& names = model.vocab();
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  const std::string no_prob = "-99";

  std::vector<std::string> uni, bi, tri;
  for (std::uint32_t w = 0; w < names.size(); ++w) {
    std::string line = w == TrigramModel::bos_id ? no_prob : fmt(std::log10(model.unigram_prob_ids(w)));
    line += '\t' + names[w];
    const auto h = model.bigram_history(w);
    if (h.total > 0)
      line += '\t' + fmt(std::log10(model.discount() * static_cast<double>(h.types) / static_cast<double>(h.total)));
    uni.push_back(std::move(line));
  }

  auto bigram_line = [&](std::uint32_t u, std::uint32_t v, const std::string& logp) {
    std::string line = logp + '\t' + names[u] + ' ' + names[v];
    const auto h = model.trigram_history(u, v);
    if (h.total > 0)
      line += '\t' + fmt(std::log10(model.discount() * static_cast<double>(h.types) / static_cast<double>(h.total)));
    return line;
  };
  for (const auto& [k, c] : model.bigrams()) bi.push_back(bigram_line(k[0], k[1], fmt(std::log10(model.bigram_prob_ids(k[0], k[1])))));
  // <s> <s> is never predicted but carries the backoff weight of the
  // sentence-initial trigram history.
  if (!model.bigrams().count({TrigramModel::bos_id, TrigramModel::bos_id}) &&
      model.trigram_history(TrigramModel::bos_id, TrigramModel::bos_id).total > 0)
    bi.push_back(bigram_line(TrigramModel::bos_id, TrigramModel::bos_id, no_prob));
  for (const auto& [k, c] : model.trigrams())
    tri.push_back(fmt(std::log10(model.prob_ids(k[0], k[1], k[2]))) + '\t' + names[k[0]] + ' ' + names[k[1]] + ' ' +
                  names[k[2]]);

  auto by_words = [](const std::string& a, const std::string& b) {
    return a.substr(a.find('\t') + 1) < b.substr(b.find('\t') + 1);
  };
  std::sort(uni.begin(), uni.end(), by_words);
  std::sort(bi.begin(), bi.end(), by_words);
  std::sort(tri.begin(), tri.end(), by_words);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << "\\data\\\n"
      << "ngram 1=" << uni.size() << '\n'
      << "ngram 2=" << bi.size() << '\n'
      << "ngram 3=" << tri.size() << "\n\n";
  out << "\\1-grams:\n";
  for (const auto& l : uni) out << l << '\n';
  out << "\n\\2-grams:\n";
  for (const auto& l : bi) out << l << '\n';
  out << "\n\\3-grams:\n";
  for (const auto& l : tri) out << l << '\n';
  out << "\n\\end\\\n";
}

} // namespace paraug
