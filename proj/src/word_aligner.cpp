#include "paraug/word_aligner.hpp"

#include "paraug/errors.hpp"
#include "paraug/parallel.hpp"
#include "paraug/text_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace paraug {

std::string_view to_string(AlignDirection d) {
  return d == AlignDirection::src_given_tgt ? "src_given_tgt" : "tgt_given_src";
}

AlignDirection parse_align_direction(std::string_view s) {
  if (s == "src_given_tgt") return AlignDirection::src_given_tgt;
  if (s == "tgt_given_src") return AlignDirection::tgt_given_src;
  throw InputError("unknown alignment direction: " + std::string(s));
}

std::uint32_t TranslationTable::intern_conditioning(const std::string& token) {
  auto [it, inserted] = conditioning_ids_.emplace(token, static_cast<std::uint32_t>(conditioning_names_.size()));
  if (inserted) conditioning_names_.push_back(token);
  return it->second;
}

std::uint32_t TranslationTable::intern_generated(const std::string& token) {
  auto [it, inserted] = generated_ids_.emplace(token, static_cast<std::uint32_t>(generated_names_.size()));
  if (inserted) generated_names_.push_back(token);
  return it->second;
}

double TranslationTable::lookup(std::uint32_t cond, std::uint32_t gen) const {
  auto it = probs_.find(key(cond, gen));
  return it == probs_.end() ? 0.0 : it->second;
}

double TranslationTable::prob(const std::string& generated, const std::string& conditioning) const {
  auto g = generated_ids_.find(generated);
  auto c = conditioning_ids_.find(conditioning);
  if (g == generated_ids_.end() || c == conditioning_ids_.end()) return 0.0;
  return lookup(c->second, g->second);
}

double TranslationTable::prob_null(const std::string& generated) const {
  return prob(generated, std::string(null_token));
}

void TranslationTable::for_each(
    const std::function<void(const std::string&, const std::string&, double)>& fn) const {
  for (const auto& [k, p] : probs_)
    fn(generated_names_[k & 0xFFFFFFFFu], conditioning_names_[k >> 32], p);
}

namespace {

constexpr std::size_t estep_block = 1024;

struct PreparedPair {
  std::size_t conditioning_len = 0;  // including NULL
  std::size_t generated_len = 0;
  // slot of t(f_j | e_i) at [j * conditioning_len + i]
  std::vector<std::uint32_t> slots;
};

} // namespace

TranslationTable train_ibm1(const ParallelCorpus& corpus, std::size_t iterations, AlignDirection direction,
                            std::size_t workers) {
  if (iterations == 0) throw std::invalid_argument("train_ibm1: iterations must be >= 1");
  if (corpus.size() == 0) throw std::invalid_argument("train_ibm1: empty corpus");

  TranslationTable table;
  table.direction_ = direction;
  table.intern_conditioning(std::string(TranslationTable::null_token));

  const auto& gen_side = direction == AlignDirection::src_given_tgt ? corpus.source : corpus.target;
  const auto& cond_side = direction == AlignDirection::src_given_tgt ? corpus.target : corpus.source;

  // Assign one slot per co-occurring (conditioning, generated) pair, in
  // first-seen order so slot numbering is deterministic.
  std::unordered_map<std::uint64_t, std::uint32_t> slot_of;
  std::vector<std::uint32_t> slot_cond;
  std::vector<std::uint64_t> slot_key;
  std::vector<PreparedPair> pairs(corpus.size());
  std::vector<std::uint32_t> cond_ids, gen_ids;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    cond_ids.assign(1, 0);
    for (const auto& tok : cond_side[s].tokens) cond_ids.push_back(table.intern_conditioning(tok));
    gen_ids.clear();
    for (const auto& tok : gen_side[s].tokens) gen_ids.push_back(table.intern_generated(tok));

    auto& pp = pairs[s];
    pp.conditioning_len = cond_ids.size();
    pp.generated_len = gen_ids.size();
    pp.slots.reserve(cond_ids.size() * gen_ids.size());
    for (auto g : gen_ids) {
      for (auto c : cond_ids) {
        const auto k = TranslationTable::key(c, g);
        auto [it, inserted] = slot_of.emplace(k, static_cast<std::uint32_t>(slot_cond.size()));
        if (inserted) {
          slot_cond.push_back(c);
          slot_key.push_back(k);
        }
        pp.slots.push_back(it->second);
      }
    }
  }

  const std::size_t n_slots = slot_cond.size();
  const std::size_t n_cond = table.conditioning_names_.size();
  std::vector<double> t(n_slots);
  {
    std::vector<std::size_t> cooccur(n_cond, 0);
    for (auto c : slot_cond) ++cooccur[c];
    for (std::size_t k = 0; k < n_slots; ++k) t[k] = 1.0 / static_cast<double>(cooccur[slot_cond[k]]);
  }

  std::vector<double> counts(n_slots);
  std::vector<std::vector<double>> posteriors(estep_block);
  std::vector<double> sentence_ll(estep_block);

  // One pass over the corpus; returns the log-likelihood under the current t.
  auto expectation = [&](bool accumulate) {
    double ll = 0.0;
    for (std::size_t begin = 0; begin < pairs.size(); begin += estep_block) {
      const std::size_t end = std::min(pairs.size(), begin + estep_block);
      parallel_for(end - begin, workers, [&](std::size_t local) {
        const auto& pp = pairs[begin + local];
        auto& post = posteriors[local];
        post.resize(pp.slots.size());
        double contrib = -static_cast<double>(pp.generated_len) * std::log(static_cast<double>(pp.conditioning_len));
        for (std::size_t j = 0; j < pp.generated_len; ++j) {
          const std::size_t row = j * pp.conditioning_len;
          double denom = 0.0;
          for (std::size_t i = 0; i < pp.conditioning_len; ++i) denom += t[pp.slots[row + i]];
          contrib += std::log(denom);
          for (std::size_t i = 0; i < pp.conditioning_len; ++i) post[row + i] = t[pp.slots[row + i]] / denom;
        }
        sentence_ll[local] = contrib;
      });
      for (std::size_t local = 0; local < end - begin; ++local) {
        ll += sentence_ll[local];
        if (!accumulate) continue;
        const auto& pp = pairs[begin + local];
        const auto& post = posteriors[local];
        for (std::size_t k = 0; k < pp.slots.size(); ++k) counts[pp.slots[k]] += post[k];
      }
    }
    return ll;
  };

  std::vector<double> totals(n_cond);
  for (std::size_t iter = 0; iter < iterations; ++iter) {
    std::fill(counts.begin(), counts.end(), 0.0);
    table.log_likelihood_.push_back(expectation(true));

    std::fill(totals.begin(), totals.end(), 0.0);
    for (std::size_t k = 0; k < n_slots; ++k) totals[slot_cond[k]] += counts[k];
    for (std::size_t k = 0; k < n_slots; ++k) t[k] = counts[k] / totals[slot_cond[k]];
  }
  table.log_likelihood_.push_back(expectation(false));

  table.probs_.reserve(n_slots);
  for (std::size_t k = 0; k < n_slots; ++k) table.probs_.emplace(slot_key[k], t[k]);
  return table;
}

void save_translation_table(const std::filesystem::path& path, const TranslationTable& table) {
  // Columns are always target, source, probability; the header says which
  // side is conditioned on. Rows sort by (source, target).
  const bool src_generated = table.direction() == AlignDirection::src_given_tgt;
  std::vector<std::tuple<std::string, std::string, double>> rows;
  rows.reserve(table.entry_count());
  table.for_each([&](const std::string& gen, const std::string& cond, double p) {
    if (src_generated)
      rows.emplace_back(gen, cond, p);
    else
      rows.emplace_back(cond, gen, p);
  });
  std::sort(rows.begin(), rows.end());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << "#direction\t" << to_string(table.direction()) << '\n';
  char buf[64];
  for (const auto& [src, tgt, p] : rows) {
    std::snprintf(buf, sizeof buf, "%.12g", p);
    out << tgt << '\t' << src << '\t' << buf << '\n';
  }
}

TranslationTable load_translation_table(const std::filesystem::path& path) {
  const std::string buf = read_file(path.string());
  TranslationTable table;
  table.intern_conditioning(std::string(TranslationTable::null_token));
  const auto lines = split_lines(buf);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i], '\t');
    if (lines[i].front() == '#') {
      if (fields.size() == 2 && fields[0] == "#direction") table.direction_ = parse_align_direction(fields[1]);
      continue;
    }
    if (fields.size() != 3) throw ParseError("translation table row needs 3 columns", i + 1);
    double p = 0.0;
    const auto& ps = fields[2];
    auto [ptr, ec] = std::from_chars(ps.data(), ps.data() + ps.size(), p);
    if (ec != std::errc() || ptr != ps.data() + ps.size() || !(p >= 0.0 && p <= 1.0))
      throw ParseError("bad probability '" + ps + "'", i + 1);
    const bool src_generated = table.direction_ == AlignDirection::src_given_tgt;
    const auto c = table.intern_conditioning(src_generated ? fields[0] : fields[1]);
    const auto g = table.intern_generated(src_generated ? fields[1] : fields[0]);
    table.probs_[TranslationTable::key(c, g)] = p;
  }
  return table;
}

AlignResult viterbi_align(const Sentence& source, const Sentence& target, const TranslationTable& table) {
  const bool src_generated = table.direction() == AlignDirection::src_given_tgt;
  const auto& gen = src_generated ? source.tokens : target.tokens;
  const auto& cond = src_generated ? target.tokens : source.tokens;

  AlignResult result;
  for (std::size_t j = 0; j < gen.size(); ++j) {
    if (!table.knows_generated(gen[j])) {
      ++result.unknown_tokens;
      continue;
    }
    double best = 0.0;
    std::optional<std::size_t> best_i;
    for (std::size_t i = 0; i < cond.size(); ++i) {
      const double p = table.prob(gen[j], cond[i]);
      if (p > best) {
        best = p;
        best_i = i;
      }
    }
    if (!best_i || table.prob_null(gen[j]) > best) continue;
    if (src_generated)
      result.alignment.links.push_back({j, *best_i});
    else
      result.alignment.links.push_back({*best_i, j});
  }
  std::sort(result.alignment.links.begin(), result.alignment.links.end());
  return result;
}

TargetSpanLookup lookup_target_span(const SentenceAlignment& alignment, std::size_t source_index,
                                    std::size_t max_span) {
  std::optional<std::size_t> lo, hi;
  for (const auto& link : alignment.links) {
    if (link.source != source_index) continue;
    lo = lo ? std::min(*lo, link.target) : link.target;
    hi = hi ? std::max(*hi, link.target) : link.target;
  }
  if (!lo) return {std::nullopt, SpanFailure::unlinked};
  TargetSpan span{*lo, *hi};
  if (span.length() > max_span) return {std::nullopt, SpanFailure::too_long};
  return {span, SpanFailure::none};
}

RareWordTranslation translate_rare_word(const RareWord& rare, const ParallelCorpus& corpus,
                                        const TranslationTable& table, std::size_t max_span) {
  if (rare.host_sentence_ids.empty()) throw std::invalid_argument("translate_rare_word: no host sentence");
  const std::size_t host = *std::min_element(rare.host_sentence_ids.begin(), rare.host_sentence_ids.end());
  const auto& src = corpus.source.at(host);
  const auto pos = std::find(src.tokens.begin(), src.tokens.end(), rare.surface);
  if (pos == src.tokens.end())
    throw std::invalid_argument("translate_rare_word: '" + rare.surface + "' not in host sentence");

  RareWordTranslation out;
  out.host_sentence = host;
  out.source_index = static_cast<std::size_t>(pos - src.tokens.begin());
  const auto aligned = viterbi_align(src, corpus.target.at(host), table);
  const auto lookup = lookup_target_span(aligned.alignment, out.source_index, max_span);
  out.failure = lookup.failure;
  if (lookup.span) {
    const auto& tgt = corpus.target.at(host).tokens;
    out.tokens.emplace(tgt.begin() + static_cast<std::ptrdiff_t>(lookup.span->start),
                       tgt.begin() + static_cast<std::ptrdiff_t>(lookup.span->end) + 1);
  }
  return out;
}

std::string export_pharaoh(const SentenceAlignment& alignment) {
  auto links = alignment.links;
  std::sort(links.begin(), links.end());
  std::string out;
  for (const auto& l : links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(l.source) + '-' + std::to_string(l.target);
  }
  return out;
}

SentenceAlignment import_pharaoh(std::string_view line) {
  SentenceAlignment out;
  for (const auto& tok : split_whitespace(line)) {
    const auto dash = tok.find('-');
    AlignmentLink link;
    bool ok = dash != std::string::npos && dash > 0 && dash + 1 < tok.size();
    if (ok) {
      const char* b = tok.data();
      auto r1 = std::from_chars(b, b + dash, link.source);
      auto r2 = std::from_chars(b + dash + 1, b + tok.size(), link.target);
      ok = r1.ec == std::errc() && r1.ptr == b + dash && r2.ec == std::errc() && r2.ptr == b + tok.size();
    }
    if (!ok) throw ParseError("malformed alignment token '" + tok + "'");
    out.links.push_back(link);
  }
  std::sort(out.links.begin(), out.links.end());
  out.links.erase(std::unique(out.links.begin(), out.links.end()), out.links.end());
  return out;
}

} // namespace paraug
