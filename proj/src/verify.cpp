#include "paraug/verify.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <utility>

namespace paraug {

namespace {

constexpr double score_tolerance = 1e-9;

bool close(double a, double b) { return std::abs(a - b) <= score_tolerance * std::max(1.0, std::abs(b)); }

std::string describe(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::optional<std::vector<double>> mean_vector(const std::vector<std::string>& words, const EmbeddingTable& table) {
  std::vector<double> acc(table.dim(), 0.0);
  for (const auto& w : words) {
    const auto v = table.find(w);
    if (!v) return std::nullopt;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += (*v)[k];
  }
  for (double& x : acc) x /= static_cast<double>(words.size());
  return acc;
}

double plain_cosine(const std::vector<double>& u, std::span<const double> v) {
  long double dot = 0, nu = 0, nv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += static_cast<long double>(u[k]) * v[k];
    nu += static_cast<long double>(u[k]) * u[k];
    nv += static_cast<long double>(v[k]) * v[k];
  }
  if (nu == 0 || nv == 0) return 0.0;
  const double c = static_cast<double>(dot / std::sqrt(nu * nv));
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

// Product of trigram probabilities for every predicted position within two
// tokens after the span, on the sentence padded with two boundary symbols.
double context_score(const LanguageModel& lm, const std::vector<std::string>& tokens, std::size_t first,
                     std::size_t last) {
  std::vector<std::string> padded{std::string(bos_token), std::string(bos_token)};
  padded.insert(padded.end(), tokens.begin(), tokens.end());
  padded.emplace_back(eos_token);
  padded.emplace_back(eos_token);
  double score = 1.0;
  for (std::size_t p = first + 2; p <= last + 4; ++p) score *= lm.prob(padded[p - 2], padded[p - 1], padded[p]);
  return score;
}

std::vector<std::string> rebuild(const std::vector<std::string>& base, TokenSpan span,
                                 const std::vector<std::string>& insert) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < span.start; ++i) out.push_back(base[i]);
  for (const auto& w : insert) out.push_back(w);
  for (std::size_t i = span.end + 1; i < base.size(); ++i) out.push_back(base[i]);
  return out;
}

} // namespace

std::vector<Violation> verify_provenance(std::span<const ProvenanceEntry> entries, const VerifyResources& res,
                                         const AugmentationConfig& config) {
  std::vector<Violation> out;
  std::map<std::pair<std::string, std::vector<std::string>>, std::size_t> per_item;

  for (const auto& e : entries) {
    if (!e.accepted) continue;
    const auto& r = e.record;
    auto violate = [&](std::string check, std::string detail) {
      out.push_back({e.record_id, std::move(check), std::move(detail)});
    };

    if (r.rejection) violate("status", "accepted record carries a rejection reason");
    if (++per_item[{e.set, r.item_surface}] > config.max_per_item)
      violate("cap", "item exceeds max_per_item accepted pairs");

    if (!r.base_sentence_id || *r.base_sentence_id >= res.corpus.size() || !r.source_span || !r.target_span) {
      violate("splice", "missing or out-of-range base sentence or span");
      continue;
    }
    const auto& base_src = res.corpus.source[*r.base_sentence_id].tokens;
    const auto& base_tgt = res.corpus.target[*r.base_sentence_id].tokens;
    const auto ss = *r.source_span;
    const auto ts = *r.target_span;
    if (ss.start > ss.end || ss.end >= base_src.size() || ts.start > ts.end || ts.end >= base_tgt.size() ||
        r.source_inserted.empty() || r.target_inserted.empty()) {
      violate("splice", "span outside base sentence");
      continue;
    }
    if (rebuild(base_src, ss, r.source_inserted) != e.source_tokens ||
        rebuild(base_tgt, ts, r.target_inserted) != e.target_tokens)
      violate("splice", "synthetic tokens differ from base with span replaced");
    const std::vector<std::string> src_replaced(base_src.begin() + static_cast<std::ptrdiff_t>(ss.start),
                                                base_src.begin() + static_cast<std::ptrdiff_t>(ss.end) + 1);
    const std::vector<std::string> tgt_replaced(base_tgt.begin() + static_cast<std::ptrdiff_t>(ts.start),
                                                base_tgt.begin() + static_cast<std::ptrdiff_t>(ts.end) + 1);
    const TokenSpan syn_ss{ss.start, ss.start + r.source_inserted.size() - 1};
    const TokenSpan syn_ts{ts.start, ts.start + r.target_inserted.size() - 1};
    if (src_replaced != r.source_replaced || tgt_replaced != r.target_replaced ||
        syn_ss.end >= e.source_tokens.size() || syn_ts.end >= e.target_tokens.size() ||
        rebuild(e.source_tokens, syn_ss, src_replaced) != base_src ||
        rebuild(e.target_tokens, syn_ts, tgt_replaced) != base_tgt) {
      violate("splice", "restoring the replaced span does not reproduce the base pair");
      continue;
    }

    if (config.use_word_sim) {
      if (!r.word_sim || *r.word_sim < config.word_sim_min) {
        violate("word_sim", "recorded similarity " + (r.word_sim ? describe(*r.word_sim) : "missing") +
                                " below " + describe(config.word_sim_min));
      } else {
        const auto query = mean_vector(r.item_surface, res.embeddings_src);
        const auto cand = res.embeddings_src.find(base_src[ss.start]);
        if (!query || !cand)
          violate("word_sim", "item or candidate word has no embedding");
        else if (const double c = plain_cosine(*query, *cand); !close(c, *r.word_sim))
          violate("word_sim", "recomputed similarity " + describe(c) + " != recorded " + describe(*r.word_sim));
      }
    }

    if (config.use_pos) {
      if (!r.syntactic || !r.syntactic->ok) violate("syntactic", "recorded verdict is not a pass");
      const TokenAnnotation* cand = res.lexicon_src ? res.lexicon_src->find(base_src[ss.start]) : nullptr;
      const TokenAnnotation* item = nullptr;
      if (res.lexicon_src) {
        std::string whole;
        for (const auto& w : r.item_surface) whole += (whole.empty() ? "" : " ") + w;
        item = res.lexicon_src->find(whole);
        if (!item) item = res.lexicon_src->find(r.item_surface.back());
      }
      if (!cand || !item) {
        violate("syntactic", "item or candidate word is unannotated");
      } else {
        bool ok = item->pos == cand->pos;
        if (ok && config.use_morph) {
          for (const auto& [key, value] : item->morph) {
            if (config.source_role == LanguageRole::number_only && key != "Number") continue;
            auto it = cand->morph.find(key);
            if (it != cand->morph.end() && it->second != value) ok = false;
          }
        }
        if (!ok) violate("syntactic", "annotations disagree");
      }
    }

    const std::pair<const char*, std::optional<double>> ratios[] = {{"lm_src", r.lm_ratio_src},
                                                                    {"lm_tgt", r.lm_ratio_tgt}};
    for (const auto& [name, recorded] : ratios) {
      const bool source_side = std::string_view(name) == "lm_src";
      if (!recorded || !(*recorded >= config.lm_threshold)) {
        violate(name, "recorded ratio " + (recorded ? describe(*recorded) : "missing") + " below threshold " +
                          describe(config.lm_threshold));
        continue;
      }
      const auto& lm = source_side ? res.lm_src : res.lm_tgt;
      const auto& base = source_side ? base_src : base_tgt;
      const auto& syn = source_side ? e.source_tokens : e.target_tokens;
      const auto orig_span = source_side ? ss : ts;
      const auto syn_span = source_side ? syn_ss : syn_ts;
      const double ratio = context_score(lm, syn, syn_span.start, syn_span.end) /
                           context_score(lm, base, orig_span.start, orig_span.end);
      if (!close(ratio, *recorded))
        violate(name, "recomputed ratio " + describe(ratio) + " != recorded " + describe(*recorded));
    }
  }
  return out;
}

} // namespace paraug
