#pragma once

#include "paraug/corpus_io.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace paraug {

// Dense word vectors, one row per token, stored row-major.
class EmbeddingTable {
public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  // Appends a row; returns false (and keeps the existing row) if the token is
  // already present. Throws std::invalid_argument on a length mismatch.
  bool add(const std::string& token, std::span<const double> vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  const std::string& token(std::size_t row) const { return tokens_.at(row); }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::optional<std::span<const double>> find(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  std::optional<double> alpha_applied() const noexcept { return alpha_applied_; }
  void set_alpha_applied(double alpha) { alpha_applied_ = alpha; }

private:
  std::size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::optional<double> alpha_applied_;
};

// Textual word-vector format: optional "count dim" header, then
// "token v1 ... vdim" per line.
Loaded<EmbeddingTable> load_embeddings(const std::filesystem::path& path);

// Writes the header and every row with components fixed to 6 decimals.
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

inline constexpr double eigenvalue_floor = 1e-10;

// Similarity-order transform: rows are length-normalized, then mapped by
// X -> X Q diag(lambda)^((alpha - 1) / 2) where X^T X = Q diag(lambda) Q^T.
// Eigenvalues below 1e-10 are clipped up to 1e-10.
EmbeddingTable postprocess_alpha(const EmbeddingTable& table, double alpha);

// Cosine similarity clamped to [-1, 1]; 0 when either vector is all zeros.
double cosine(std::span<const double> u, std::span<const double> v);

struct SentenceVector {
  std::vector<double> vector;
  std::size_t covered_tokens = 0;
  std::size_t total_tokens = 0;
};

// Mean of the vectors of tokens present in the table. No re-normalization.
SentenceVector sentence_embedding(std::span<const std::string> tokens, const EmbeddingTable& table);
inline SentenceVector sentence_embedding(const Sentence& sentence, const EmbeddingTable& table) {
  return sentence_embedding(sentence.tokens, table);
}

// Phrase embedding by the same averaging rule. Throws on an empty term.
SentenceVector term_embedding(std::span<const std::string> term, const EmbeddingTable& table);

struct SimilarityHit {
  std::size_t id = 0;
  double score = 0.0;

  bool operator==(const SimilarityHit&) const = default;
};

// The k best sentences (by index into corpus_vectors) outside `exclude`,
// ordered by score descending then id ascending.
std::vector<SimilarityHit> top_k_sentences(std::span<const double> query,
                                           std::span<const SentenceVector> corpus_vectors, std::size_t k,
                                           const std::unordered_set<std::size_t>& exclude);

// Eligible token position with the highest cosine to `query`; lowest index wins ties.
std::optional<SimilarityHit> best_word_in_sentence(std::span<const double> query,
                                                   std::span<const std::string> tokens,
                                                   const EmbeddingTable& table,
                                                   const std::function<bool(std::size_t)>& eligible);

} // namespace paraug
