#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "ees/similarity.hpp"
#include "oracles.hpp"

using namespace ees;

namespace {

double naive_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  long double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    nu += static_cast<long double>(u[i]) * u[i];
    nv += static_cast<long double>(v[i]) * v[i];
  }
  return static_cast<double>(dot / (std::sqrt(nu) * std::sqrt(nv)));
}

}  // namespace

TEST(Cosine, HandExamples) {
  EXPECT_EQ(cosine(Embedding{{1, 0}}, Embedding{{1, 0}}), 1.0);
  EXPECT_EQ(cosine(Embedding{{1, 0}}, Embedding{{0, 1}}), 0.0);
  EXPECT_NEAR(cosine(Embedding{{1, 2, 2}}, Embedding{{2, 1, 2}}), 8.0 / 9.0, 1e-15);
}

TEST(Cosine, ZeroVectorAndMismatch) {
  EXPECT_EQ(cosine(Embedding{{0, 0}}, Embedding{{1, 0}}), 0.0);
  EXPECT_THROW(cosine(Embedding{{1, 0}}, Embedding{{1, 0, 0}}), std::invalid_argument);
}

TEST(Cosine, MatchesLongDoubleOracle) {
  oracle::Rng rng(31);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 500; ++i) {
    const std::size_t dim = 2 + oracle::pick(rng, 511);
    std::vector<double> u(dim), v(dim);
    for (auto& x : u) x = nd(rng);
    for (auto& x : v) x = nd(rng);
    const double c = cosine(u, v);
    EXPECT_NEAR(c, naive_cosine(u, v), 1e-9);
    EXPECT_LE(std::abs(c), 1.0);
  }
}

TEST(Fnv, KnownValues) {
  EXPECT_EQ(fnv1a64(""), 14695981039346656037ull);
  EXPECT_EQ(fnv1a64("abc"), 0xe71fa2190541574bull);
}

TEST(ReferenceEmbedder, BlankIsZero) {
  const auto e = embed_reference("");
  EXPECT_EQ(e.dim(), kReferenceDim);
  EXPECT_EQ(e.norm(), 0.0);
  EXPECT_EQ(embed_reference("   ").norm(), 0.0);
}

TEST(ReferenceEmbedder, Deterministic) {
  EXPECT_EQ(embed_reference("a crowd near the river"), embed_reference("a crowd near the river"));
}

TEST(ReferenceEmbedder, AbcHitsOneBucket) {
  const auto e = embed_reference("abc");
  for (std::size_t i = 0; i < e.dim(); ++i) {
    EXPECT_EQ(e.components[i], i == 75 ? 1.0 : 0.0) << i;
  }
}

TEST(ReferenceEmbedder, UnitNorm) {
  EXPECT_NEAR(embed_reference("speech at the rally").norm(), 1.0, 1e-12);
  EXPECT_NEAR(embed_reference("会议").norm(), 1.0, 1e-12);
}

TEST(ReferenceEmbedder, BatchMatchesSingle) {
  const ReferenceEmbedder emb;
  const std::vector<std::string> texts = {"one", "two words", "", "three more words"};
  const auto batch = emb.embed_batch(texts);
  ASSERT_EQ(batch.size(), texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) EXPECT_EQ(batch[i], emb.embed(texts[i]));
}

TEST(Embedders, CountingAndCaching) {
  const ReferenceEmbedder ref;
  CountingEmbedder counting(ref);
  CachingEmbedder cached(counting);
  cached.embed("x y z");
  cached.embed("x y z");
  const std::vector<std::string> batch = {"x y z", "new", "new"};
  cached.embed_batch(batch);
  EXPECT_EQ(counting.calls(), 2u);
  counting.reset();
  EXPECT_EQ(counting.calls(), 0u);
}

TEST(Lexicon, SpeechExample) {
  const std::vector<std::string> lex = {"speech", "raising"};
  const LexiconActionExtractor ex(lex);
  EXPECT_EQ(ex.extract("giving a speech, and raising his fist"),
            (std::vector<std::string>{"speech", "raising"}));
}

TEST(Lexicon, EmptyLexiconFallsBack) {
  const LexiconActionExtractor ex;
  EXPECT_EQ(ex.extract("anything at all"), (std::vector<std::string>{"anything at all"}));
}

TEST(Lexicon, CjkPunctuationSeparates) {
  const std::vector<std::string> lex = {"演讲"};
  const LexiconActionExtractor ex(lex);
  EXPECT_EQ(ex.extract("他在广场，演讲。"), (std::vector<std::string>{"演讲"}));
}

TEST(Lexicon, MatchesMembershipScan) {
  oracle::Rng rng(32);
  const std::vector<std::string> words = {"rally", "speech", "meeting", "crowd", "river",
                                          "flag",  "market", "night",   "smoke", "signing"};
  const std::vector<std::string> lex = {"speech", "signing", "rally"};
  const LexiconActionExtractor ex(lex);
  const std::regex sep("[\\s.,;:!?]+");
  for (int i = 0; i < 100; ++i) {
    std::string text;
    for (std::size_t j = 0, n = 1 + oracle::pick(rng, 8); j < n; ++j) {
      if (j) text += oracle::coin(rng, 0.8) ? " " : ", ";
      text += words[oracle::pick(rng, words.size())];
    }
    std::vector<std::string> expected;
    for (std::sregex_token_iterator it(text.begin(), text.end(), sep, -1), end; it != end; ++it) {
      const std::string tok = *it;
      if (std::find(lex.begin(), lex.end(), tok) != lex.end()) expected.push_back(tok);
    }
    if (expected.empty()) expected.push_back(text);
    EXPECT_EQ(ex.extract(text), expected) << text;
  }
}

TEST(EventActions, ExplicitActionWins) {
  const std::vector<std::string> lex = {"speech"};
  const LexiconActionExtractor ex(lex);
  EXPECT_EQ(event_actions("marching", "a speech", ex), (std::vector<std::string>{"marching"}));
  EXPECT_EQ(event_actions(" ", "a speech", ex), (std::vector<std::string>{"speech"}));
}

TEST(EventScore, Arithmetic) {
  EXPECT_NEAR(event_score(0.8, 0.6, 0.5, 0.5), 0.7, 1e-15);
  EXPECT_EQ(event_score(0.8, 0.6, 1.0, 0.0), 0.8);
  EXPECT_EQ(event_score(0.8, 0.6, 0.0, 1.0), 0.6);
  EXPECT_THROW(event_score(0.8, 0.6, 0.7, 0.7), std::invalid_argument);
  EXPECT_THROW(event_score(0.8, 0.6, -0.5, 1.5), std::invalid_argument);
}

TEST(TopK, Examples) {
  const std::vector<Scored> v = {{1, 0.9}, {2, 0.1}, {3, 0.5}};
  EXPECT_EQ(top_k(v, 2), (std::vector<Scored>{{1, 0.9}, {3, 0.5}}));
  EXPECT_EQ(top_k(v, 10), (std::vector<Scored>{{1, 0.9}, {3, 0.5}, {2, 0.1}}));
  EXPECT_EQ(top_k({{7, 0.5}, {4, 0.5}}, 1), (std::vector<Scored>{{4, 0.5}}));
  EXPECT_THROW(top_k(v, 0), std::invalid_argument);
  EXPECT_TRUE(top_k({}, 3).empty());
}

TEST(TopK, MatchesFullSort) {
  oracle::Rng rng(33);
  for (int i = 0; i < 200; ++i) {
    std::vector<Scored> v;
    for (std::size_t j = 0, n = oracle::pick(rng, 40); j < n; ++j) {
      v.push_back({oracle::pick(rng, 1000), static_cast<double>(oracle::pick(rng, 5)) / 4.0});
    }
    const std::size_t k = 1 + oracle::pick(rng, 45);
    EXPECT_EQ(top_k(v, k), oracle::sort_oracle(v, k));
  }
}
