#include "paraug/embedding_space.hpp"

#include "paraug/errors.hpp"
#include "paraug/symmetric_eigen.hpp"
#include "paraug/text_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace paraug {

bool EmbeddingTable::add(const std::string& token, std::span<const double> vector) {
  if (vector.size() != dim_)
    throw std::invalid_argument("embedding row for '" + token + "' has " + std::to_string(vector.size()) +
                                " components, expected " + std::to_string(dim_));
  if (index_.count(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<std::span<const double>> EmbeddingTable::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return row(it->second);
}

namespace {

bool parse_double(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_size(std::string_view s, std::size_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

} // namespace

Loaded<EmbeddingTable> load_embeddings(const std::filesystem::path& path) {
  const std::string buf = read_file(path.string());
  if (auto bad = find_invalid_utf8(buf))
    throw InputError("invalid UTF-8 in " + path.string() + " at byte offset " + std::to_string(*bad));

  Loaded<EmbeddingTable> out;
  std::optional<std::size_t> dim;
  bool first = true;
  std::vector<double> values;
  const auto lines = split_lines(buf);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fields = split_whitespace(lines[i]);
    if (fields.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(i + 1);

    if (first) {
      first = false;
      std::size_t count = 0, header_dim = 0;
      if (fields.size() == 2 && parse_size(fields[0], count) && parse_size(fields[1], header_dim)) {
        if (header_dim == 0) throw InputError("embedding header declares dimension 0 in " + path.string());
        dim = header_dim;
        continue;
      }
    }
    if (fields.size() < 2) {
      out.warnings.push_back(where + ": no vector components");
      continue;
    }
    if (!dim) dim = fields.size() - 1;
    if (fields.size() - 1 != *dim) {
      out.warnings.push_back(where + ": expected " + std::to_string(*dim) + " components, got " +
                             std::to_string(fields.size() - 1));
      continue;
    }
    values.assign(*dim, 0.0);
    bool ok = true;
    for (std::size_t k = 0; k < *dim && ok; ++k)
      ok = parse_double(fields[k + 1], values[k]) && std::isfinite(values[k]);
    if (!ok) {
      out.warnings.push_back(where + ": unparseable or non-finite component");
      continue;
    }
    if (out.value.dim() == 0) out.value = EmbeddingTable(*dim);
    if (!out.value.add(fields[0], values))
      out.warnings.push_back(where + ": duplicate token '" + fields[0] + "', first occurrence kept");
  }
  if (out.value.empty()) throw InputError("no embedding vectors parsed from " + path.string());
  return out;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << table.token(r);
    for (double x : table.row(r)) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      out << buf;
    }
    out << '\n';
  }
}

EmbeddingTable postprocess_alpha(const EmbeddingTable& table, double alpha) {
  if (table.empty()) throw std::invalid_argument("postprocess_alpha: empty table");
  if (!std::isfinite(alpha)) throw std::invalid_argument("postprocess_alpha: alpha must be finite");

  const std::size_t n = table.size();
  const std::size_t d = table.dim();

  std::vector<double> x(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = table.row(r);
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < d; ++c) x[r * d + c] = norm > 0.0 ? row[c] / norm : 0.0;
  }

  std::vector<double> gram(d * d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.data() + r * d;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) gram[i * d + j] += xr[i] * xr[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[i * d + j] = gram[j * d + i];

  const SymmetricEigen eig = jacobi_eigen(std::move(gram), d);

  // W = Q diag(lambda^((alpha - 1) / 2))
  std::vector<double> w(d * d);
  const double exponent = (alpha - 1.0) / 2.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double lambda = std::max(eig.values[k], eigenvalue_floor);
    const double scale = std::pow(lambda, exponent);
    if (!std::isfinite(scale)) throw NumericError("postprocess_alpha: non-finite eigenvalue scale");
    for (std::size_t r = 0; r < d; ++r) w[r * d + k] = eig.vectors[r * d + k] * scale;
  }

  EmbeddingTable out(d);
  std::vector<double> row(d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += xr[k] * w[k * d + c];
      if (!std::isfinite(acc)) throw NumericError("postprocess_alpha: non-finite output component");
      row[c] = acc;
    }
    out.add(table.token(r), row);
  }
  out.set_alpha_applied(alpha);
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: vectors differ in length");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

SentenceVector sentence_embedding(std::span<const std::string> tokens, const EmbeddingTable& table) {
  SentenceVector out;
  out.vector.assign(table.dim(), 0.0);
  out.total_tokens = tokens.size();
  for (const auto& tok : tokens) {
    const auto v = table.find(tok);
    if (!v) continue;
    for (std::size_t k = 0; k < v->size(); ++k) out.vector[k] += (*v)[k];
    ++out.covered_tokens;
  }
  if (out.covered_tokens > 0)
    for (double& x : out.vector) x /= static_cast<double>(out.covered_tokens);
  return out;
}

SentenceVector term_embedding(std::span<const std::string> term, const EmbeddingTable& table) {
  if (term.empty()) throw std::invalid_argument("term_embedding: empty term");
  return sentence_embedding(term, table);
}

namespace {

bool ranks_before(const SimilarityHit& a, const SimilarityHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

} // namespace

std::vector<SimilarityHit> top_k_sentences(std::span<const double> query,
                                           std::span<const SentenceVector> corpus_vectors, std::size_t k,
                                           const std::unordered_set<std::size_t>& exclude) {
  if (k == 0) throw std::invalid_argument("top_k_sentences: k must be >= 1");
  std::vector<SimilarityHit> hits;
  hits.reserve(corpus_vectors.size());
  for (std::size_t id = 0; id < corpus_vectors.size(); ++id) {
    if (exclude.count(id)) continue;
    hits.push_back({id, cosine(query, corpus_vectors[id].vector)});
  }
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), ranks_before);
  hits.resize(keep);
  return hits;
}

std::optional<SimilarityHit> best_word_in_sentence(std::span<const double> query,
                                                   std::span<const std::string> tokens,
                                                   const EmbeddingTable& table,
                                                   const std::function<bool(std::size_t)>& eligible) {
  std::optional<SimilarityHit> best;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (eligible && !eligible(i)) continue;
    const auto v = table.find(tokens[i]);
    if (!v) continue;
    const double score = cosine(query, *v);
    if (!best || score > best->score) best = SimilarityHit{i, score};
  }
  return best;
}

} // namespace paraug
