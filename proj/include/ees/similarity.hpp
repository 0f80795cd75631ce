#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ees/graph_store.hpp"

namespace ees {

struct Embedding {
  std::vector<double> components;

  std::size_t dim() const { return components.size(); }
  double norm() const;
  bool operator==(const Embedding&) const = default;
};

// dot(u, v) / (|u| |v|), clamped to [-1, 1]. A zero-norm operand yields 0.
// Throws std::invalid_argument when the dimensions differ.
double cosine(std::span<const double> u, std::span<const double> v);
inline double cosine(const Embedding& u, const Embedding& v) {
  return cosine(std::span<const double>(u.components), std::span<const double>(v.components));
}

// Deterministic text -> vector map of fixed dimension. Implementations must
// be callable from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) const;
};

std::uint64_t fnv1a64(std::string_view bytes);

inline constexpr std::size_t kReferenceDim = 256;

// Character-trigram bag (code points of the trimmed text) hashed with
// 64-bit FNV-1a into 256 buckets, then L2-normalized. Texts shorter than
// three code points hash as a single gram; blank text maps to zero.
Embedding embed_reference(std::string_view text);

class ReferenceEmbedder final : public EmbeddingProvider {
 public:
  std::size_t dim() const override { return kReferenceDim; }
  Embedding embed(std::string_view text) const override { return embed_reference(text); }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;
};

// Counts how many texts pass through to the wrapped provider.
class CountingEmbedder final : public EmbeddingProvider {
 public:
  explicit CountingEmbedder(const EmbeddingProvider& inner) : inner_(inner) {}
  std::size_t dim() const override { return inner_.dim(); }
  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;
  std::size_t calls() const { return calls_.load(); }
  void reset() { calls_ = 0; }

 private:
  const EmbeddingProvider& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

// Memoizes the wrapped provider. Safe because providers are deterministic.
class CachingEmbedder final : public EmbeddingProvider {
 public:
  explicit CachingEmbedder(const EmbeddingProvider& inner) : inner_(inner) {}
  std::size_t dim() const override { return inner_.dim(); }
  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;

 private:
  const EmbeddingProvider& inner_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, Embedding> cache_;
};

class ActionExtractor {
 public:
  virtual ~ActionExtractor() = default;
  // Never empty; deterministic.
  virtual std::vector<std::string> extract(std::string_view description) const = 0;
};

// Returns the tokens of the description that appear in a lexicon, in text
// order; the whole description when none do. Tokens split on whitespace,
// ASCII punctuation and CJK/general punctuation.
class LexiconActionExtractor final : public ActionExtractor {
 public:
  LexiconActionExtractor() = default;
  explicit LexiconActionExtractor(std::span<const std::string> lexicon);

  // One phrase per line; blank lines and lines starting with '#' ignored.
  // Throws std::runtime_error if the file cannot be read.
  static LexiconActionExtractor from_file(const std::filesystem::path& path);

  std::vector<std::string> extract(std::string_view description) const override;
  std::size_t size() const { return lexicon_.size(); }

 private:
  std::unordered_set<std::string> lexicon_;
};

std::vector<std::string> tokenize_words(std::string_view text);

// Action phrases of an event: its explicit action if present, otherwise
// whatever the extractor finds in the description.
std::vector<std::string> event_actions(std::string_view action, std::string_view description,
                                       const ActionExtractor& extractor);

// w1 * action + w2 * semantic. Weights must be non-negative and sum to 1
// within 1e-9; std::invalid_argument otherwise.
double event_score(double action_sim, double semantic_sim, double w1, double w2);

struct Scored {
  NodeId id = 0;
  double score = 0.0;
  bool operator==(const Scored&) const = default;
};

// Descending score, ascending id on ties.
inline bool ranks_before(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

// The k best items under ranks_before. k must be at least 1.
std::vector<Scored> top_k(std::vector<Scored> scored, std::size_t k);

}  // namespace ees
