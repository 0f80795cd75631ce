#pragma once
// HTTP embedding provider.
//
//   POST <url>   {"texts": ["...", ...]}
//   200          {"dim": N, "vectors": [[...], ...]}
//
// The first response fixes the dimension; later responses must agree and
// every component must be finite.

#include <optional>
#include <stdexcept>
#include <string>

#include "ees/similarity.hpp"

namespace ees {

inline constexpr const char* kEmbedUrlEnv = "EES_EMBED_URL";

class RemoteEmbedderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_embedding_request(std::span<const std::string> texts);

// Validates shape and values. `expected_dim` of nullopt accepts the
// dimension the body declares.
std::vector<Embedding> decode_embedding_response(std::string_view body, std::size_t expected_count,
                                                 std::optional<std::size_t> expected_dim);

class RemoteEmbedder final : public EmbeddingProvider {
 public:
  // Sends one probe request to learn the dimension.
  explicit RemoteEmbedder(std::string url, int timeout_seconds = 30);
  static RemoteEmbedder from_env();

  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::vector<Embedding> request(std::span<const std::string> texts,
                                 std::optional<std::size_t> expected_dim) const;

  std::string origin_;  // scheme://host[:port]
  std::string path_;
  int timeout_seconds_;
  std::size_t dim_ = 0;
};

}  // namespace ees
