#include "ees/remote_embedder.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace ees {

using nlohmann::json;

std::string encode_embedding_request(std::span<const std::string> texts) {
  json body;
  body["texts"] = json::array();
  for (const auto& t : texts) body["texts"].push_back(t);
  return body.dump();
}

std::vector<Embedding> decode_embedding_response(std::string_view body, std::size_t expected_count,
                                                 std::optional<std::size_t> expected_dim) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::out_of_range& e) {
    throw RemoteEmbedderError(std::string("embedding response has a non-finite number: ") +
                              e.what());
  } catch (const json::exception& e) {
    throw RemoteEmbedderError(std::string("embedding response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("vectors")) {
    throw RemoteEmbedderError("embedding response needs 'dim' and 'vectors'");
  }
  if (!doc["dim"].is_number_unsigned() || doc["dim"].get<std::size_t>() == 0) {
    throw RemoteEmbedderError("embedding response 'dim' must be a positive integer");
  }
  const auto dim = doc["dim"].get<std::size_t>();
  if (expected_dim && dim != *expected_dim) {
    throw RemoteEmbedderError("embedding dimension changed from " + std::to_string(*expected_dim) +
                              " to " + std::to_string(dim));
  }
  const auto& vectors = doc["vectors"];
  if (!vectors.is_array() || vectors.size() != expected_count) {
    throw RemoteEmbedderError("expected " + std::to_string(expected_count) + " vectors");
  }
  std::vector<Embedding> out;
  out.reserve(expected_count);
  for (const auto& v : vectors) {
    if (!v.is_array() || v.size() != dim) {
      throw RemoteEmbedderError("vector length disagrees with dim " + std::to_string(dim));
    }
    Embedding e;
    e.components.reserve(dim);
    for (const auto& x : v) {
      if (!x.is_number()) throw RemoteEmbedderError("vector component is not a number");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw RemoteEmbedderError("vector component is not finite");
      e.components.push_back(d);
    }
    out.push_back(std::move(e));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(std::string url, int timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw RemoteEmbedderError("embedding URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  origin_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  const std::string probe[] = {"probe"};
  dim_ = request(probe, std::nullopt).front().dim();
}

RemoteEmbedder RemoteEmbedder::from_env() {
  const char* url = std::getenv(kEmbedUrlEnv);
  if (url == nullptr || *url == '\0') {
    throw RemoteEmbedderError(std::string(kEmbedUrlEnv) + " is not set");
  }
  return RemoteEmbedder(url);
}

std::vector<Embedding> RemoteEmbedder::request(std::span<const std::string> texts,
                                               std::optional<std::size_t> expected_dim) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  auto res = client.Post(path_, encode_embedding_request(texts), "application/json");
  if (!res) {
    throw RemoteEmbedderError("embedding request to " + origin_ + path_ +
                              " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw RemoteEmbedderError("embedding service returned HTTP " + std::to_string(res->status));
  }
  return decode_embedding_response(res->body, texts.size(), expected_dim);
}

Embedding RemoteEmbedder::embed(std::string_view text) const {
  const std::string one[] = {std::string(text)};
  return request(one, dim_).front();
}

std::vector<Embedding> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  return request(texts, dim_);
}

}  // namespace ees
