#include "ees/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ees/kernels.hpp"
#include "ees/text.hpp"

namespace ees {

double Embedding::norm() const {
  double s = 0.0;
  for (double x : components) s += x * x;
  return std::sqrt(s);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.size()) +
                                " vs " + std::to_string(v.size()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  // sqrt(nu * nv) keeps cosine(v, v) exactly 1 at any scale.
  const double p = nu * nv;
  const double denom = std::isnormal(p) ? std::sqrt(p) : std::sqrt(nu) * std::sqrt(nv);
  const double c = dot / denom;
  return std::clamp(c, -1.0, 1.0);
}

std::vector<Embedding> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Embedding embed_reference(std::string_view raw) {
  Embedding e{std::vector<double>(kReferenceDim, 0.0)};
  const std::string_view s = text::trim(raw);
  if (s.empty()) return e;

  const auto cps = text::code_points(s);
  auto bucket = [](std::string_view gram) { return fnv1a64(gram) % kReferenceDim; };
  if (cps.size() < 3) {
    e.components[bucket(s)] += 1.0;
  } else {
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
      // Code points are contiguous in the source, so the trigram is a substring.
      const char* begin = cps[i].data();
      const char* end = cps[i + 2].data() + cps[i + 2].size();
      e.components[bucket(std::string_view(begin, static_cast<std::size_t>(end - begin)))] += 1.0;
    }
  }
  const double n = e.norm();
  for (double& x : e.components) x /= n;
  return e;
}

std::vector<Embedding> ReferenceEmbedder::embed_batch(std::span<const std::string> texts) const {
  return kernels::embed_each(*this, texts);
}

Embedding CountingEmbedder::embed(std::string_view text) const {
  calls_.fetch_add(1);
  return inner_.embed(text);
}

std::vector<Embedding> CountingEmbedder::embed_batch(std::span<const std::string> texts) const {
  calls_.fetch_add(texts.size());
  return inner_.embed_batch(texts);
}

Embedding CachingEmbedder::embed(std::string_view text) const {
  std::string key(text);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Embedding e = inner_.embed(text);
  std::lock_guard lock(mu_);
  return cache_.emplace(std::move(key), std::move(e)).first->second;
}

std::vector<Embedding> CachingEmbedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<Embedding> out(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_at;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto it = cache_.find(texts[i]); it != cache_.end()) {
        out[i] = it->second;
      } else {
        missing_at.push_back(i);
      }
    }
  }
  if (missing_at.empty()) return out;
  std::unordered_map<std::string_view, std::size_t> slot;
  for (std::size_t i : missing_at) {
    if (slot.emplace(texts[i], missing.size()).second) missing.push_back(texts[i]);
  }
  const auto fresh = inner_.embed_batch(missing);
  std::lock_guard lock(mu_);
  for (std::size_t i : missing_at) out[i] = fresh[slot.at(texts[i])];
  for (std::size_t j = 0; j < missing.size(); ++j) cache_.emplace(missing[j], fresh[j]);
  return out;
}

namespace {

bool is_separator(std::string_view cp) {
  if (cp.size() == 1) {
    const char c = cp[0];
    return text::is_space(c) || std::ispunct(static_cast<unsigned char>(c));
  }
  const char32_t u = text::decode(cp);
  return (u >= 0x3000 && u <= 0x303F) ||  // CJK symbols and punctuation, ideographic space
         (u >= 0xFF01 && u <= 0xFF0F) || (u >= 0xFF1A && u <= 0xFF20) ||
         (u >= 0xFF3B && u <= 0xFF40) || (u >= 0xFF5B && u <= 0xFF65) ||  // fullwidth forms
         (u >= 0x2010 && u <= 0x2027) ||  // dashes, quotes, ellipsis
         u == 0x00A0 || u == 0x00B7;
}

}  // namespace

std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (auto cp : text::code_points(s)) {
    if (is_separator(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += cp;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

LexiconActionExtractor::LexiconActionExtractor(std::span<const std::string> lexicon) {
  for (const auto& phrase : lexicon) {
    auto p = text::normalize(phrase);
    if (!p.empty()) lexicon_.insert(std::move(p));
  }
}

LexiconActionExtractor LexiconActionExtractor::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read action lexicon " + path.string());
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    phrases.emplace_back(t);
  }
  if (in.bad()) throw std::runtime_error("error reading action lexicon " + path.string());
  return LexiconActionExtractor(phrases);
}

std::vector<std::string> LexiconActionExtractor::extract(std::string_view description) const {
  std::vector<std::string> out;
  if (!lexicon_.empty()) {
    for (auto& tok : tokenize_words(description)) {
      if (lexicon_.contains(text::nfc(tok))) out.push_back(std::move(tok));
    }
  }
  if (out.empty()) out.emplace_back(description);
  return out;
}

std::vector<std::string> event_actions(std::string_view action, std::string_view description,
                                       const ActionExtractor& extractor) {
  if (!text::trim(action).empty()) return {std::string(action)};
  return extractor.extract(description);
}

double event_score(double action_sim, double semantic_sim, double w1, double w2) {
  if (!(w1 >= 0.0) || !(w2 >= 0.0) || std::abs(w1 + w2 - 1.0) > 1e-9) {
    throw std::invalid_argument("event weights must be non-negative and sum to 1");
  }
  return w1 * action_sim + w2 * semantic_sim;
}

std::vector<Scored> top_k(std::vector<Scored> scored, std::size_t k) {
  if (k == 0) throw std::invalid_argument("top_k: k must be at least 1");
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    ranks_before);
  scored.resize(n);
  return scored;
}

}  // namespace ees
