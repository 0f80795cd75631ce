#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "ees/pipeline.hpp"
#include "oracles.hpp"

using namespace ees;

namespace {

// Fixed text -> vector table; unknown text maps to a distinct axis.
class TableEmbedder final : public EmbeddingProvider {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table)
      : table_(std::move(table)) {}
  std::size_t dim() const override { return 3; }
  Embedding embed(std::string_view text) const override {
    if (auto it = table_.find(std::string(text)); it != table_.end()) return {it->second};
    return {{0, 0, 1}};
  }

 private:
  std::map<std::string, std::vector<double>> table_;
};

std::vector<double> at_cos(double c) { return {c, std::sqrt(1 - c * c), 0}; }

GraphStore build(std::span<const EESRecord> records) {
  const TypeNormalizer types;
  return build_graph(records, types).graph;
}

double oracle_event_score(const RecordEvent& q, const CandidateEvent& c, const MatchConfig& cfg,
                          const ActionExtractor& ex) {
  const auto [wa, ws] = cfg.effective_weights();
  const double s = cosine(embed_reference(q.description), embed_reference(c.description));
  double a = 0;
  bool first = true;
  for (const auto& qa : event_actions(q.action, q.description, ex)) {
    for (const auto& ca : event_actions(c.action, c.description, ex)) {
      const double v = cosine(embed_reference(qa), embed_reference(ca));
      a = first ? v : std::max(a, v);
      first = false;
    }
  }
  return wa * (wa > 0 ? a : 0.0) + ws * (ws > 0 ? s : 0.0);
}

}  // namespace

TEST(Config, DefaultsAndParsing) {
  const MatchConfig d;
  EXPECT_EQ(d.mode, MatchMode::EES);
  EXPECT_EQ(d.similarity, SimilarityMode::SemanticAction);
  EXPECT_NO_THROW(d.validate());

  const auto c = parse_match_config("# comment\nmode = EE\nw1=0.25\nk_events=3\n");
  EXPECT_EQ(c.mode, MatchMode::EE);
  EXPECT_DOUBLE_EQ(c.w2, 0.75);
  EXPECT_EQ(c.k_events, 3u);
  EXPECT_EQ(parse_match_config("mode=ES").similarity, SimilarityMode::Semantic);

  EXPECT_THROW(parse_match_config("mode=XX"), ConfigError);
  EXPECT_THROW(parse_match_config("w1=0.5\nw2=0.6"), ConfigError);
  EXPECT_THROW(parse_match_config("k_scenes=0"), ConfigError);
  EXPECT_THROW(parse_match_config("mode=ES\nsimilarity=action"), ConfigError);
  EXPECT_THROW(parse_match_config("colour=blue"), ConfigError);
  EXPECT_THROW(parse_match_config("w1=abc"), ConfigError);
}

TEST(Config, EffectiveWeights) {
  MatchConfig c;
  c.w1 = 0.3;
  c.w2 = 0.7;
  EXPECT_EQ(c.effective_weights().action, 0.3);
  c.similarity = SimilarityMode::Semantic;
  EXPECT_EQ(c.effective_weights().action, 0.0);
  EXPECT_EQ(c.effective_weights().semantic, 1.0);
  c.similarity = SimilarityMode::Action;
  EXPECT_EQ(c.effective_weights().action, 1.0);
}

TEST(TypeNormalizer, Aliases) {
  const TypeNormalizer t;
  EXPECT_EQ(t.normalize("Item"), EntityType::Object);
  EXPECT_EQ(t.normalize("Entity"), EntityType::Object);
  EXPECT_EQ(t.normalize("Place"), EntityType::Location);
  EXPECT_EQ(t.normalize("Geographical Area"), EntityType::Location);
  EXPECT_EQ(t.normalize("Person"), EntityType::Person);
  EXPECT_EQ(t.normalize(" company "), EntityType::Organization);
  EXPECT_EQ(t.normalize("人物"), EntityType::Person);
  EXPECT_EQ(t.normalize("spaceship"), EntityType::Other);
}

TEST(TypeNormalizer, FromFile) {
  const auto path = std::filesystem::temp_directory_path() / "ees_test_aliases.txt";
  {
    std::ofstream out(path);
    out << "# extra\nVessel = Object\n";
  }
  EXPECT_EQ(TypeNormalizer::from_file(path).normalize("vessel"), EntityType::Object);
  {
    std::ofstream out(path);
    out << "Vessel = Spaceship\n";
  }
  EXPECT_THROW(TypeNormalizer::from_file(path), ConfigError);
  std::filesystem::remove(path);
}

TEST(MatchEntities, XiaomiCompanyHitsOrganizationOnly) {
  GraphStore g;
  const NodeId org = g.upsert_node(EntityNode{0, EntityType::Organization, "Xiaomi"});
  g.upsert_node(EntityNode{0, EntityType::Object, "Xiaomi"});
  const TypeNormalizer types;
  const std::vector<RecordEntity> q = {{"Xiaomi", "Company"}, {"Nobody", "Person"}};
  const auto m = match_entities(q, g, types);
  EXPECT_EQ(m.matched, (std::vector<NodeId>{org}));
  EXPECT_EQ(m.unmatched, (std::vector<std::size_t>{1}));
}

TEST(MatchEntities, EqualsDirectLookup) {
  oracle::Rng rng(51);
  const TypeNormalizer types;
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = oracle::random_corpus(rng, 20);
    const GraphStore g = build(corpus);
    const auto q = oracle::random_corpus(rng, 1)[0].entities;
    std::set<NodeId> expected;
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto found = g.find_entities(types.normalize(q[i].type), q[i].name);
      for (const auto& e : found) expected.insert(e.id);
      if (found.empty()) missing.push_back(i);
    }
    const auto m = match_entities(q, g, types);
    EXPECT_EQ(m.matched, (std::vector<NodeId>(expected.begin(), expected.end())));
    EXPECT_EQ(m.unmatched, missing);
  }
}

TEST(MatchEvents, WeightedArithmetic) {
  const TableEmbedder emb({{"qa", at_cos(1)},
                           {"qd", at_cos(1)},
                           {"aa", at_cos(0.8)},
                           {"ad", at_cos(0.6)},
                           {"ba", at_cos(0.9)},
                           {"bd", at_cos(0.3)}});
  const LexiconActionExtractor ex;
  const std::vector<RecordEvent> q = {{{"x"}, "qa", "qd"}};
  const std::vector<CandidateEvent> cands = {{5, "ba", "bd"}, {9, "aa", "ad"}};
  MatchConfig cfg;
  const auto r = match_events(q, cands, cfg, emb, ex);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].id, 9u);
  EXPECT_NEAR(r[0].score, 0.7, 1e-12);
  EXPECT_EQ(r[1].id, 5u);
  EXPECT_NEAR(r[1].score, 0.6, 1e-12);

  cfg.similarity = SimilarityMode::Semantic;
  EXPECT_EQ(match_events(q, cands, cfg, emb, ex)[0].id, 9u);  // 0.6 > 0.3
  cfg.similarity = SimilarityMode::Action;
  EXPECT_EQ(match_events(q, cands, cfg, emb, ex)[0].id, 5u);  // 0.9 > 0.8
}

TEST(MatchEvents, IdenticalEventScoresOne) {
  const ReferenceEmbedder emb;
  const LexiconActionExtractor ex;
  const std::vector<RecordEvent> q = {{{"x"}, "", "leaders sign a treaty at dawn"}};
  const std::vector<CandidateEvent> cands = {{1, "", "a dog barks"},
                                             {2, "", "leaders sign a treaty at dawn"}};
  const auto r = match_events(q, cands, MatchConfig{}, emb, ex);
  EXPECT_EQ(r.at(0).id, 2u);
  EXPECT_NEAR(r[0].score, 1.0, 1e-12);
  EXPECT_TRUE(match_events({}, cands, MatchConfig{}, emb, ex).empty());
}

TEST(MatchEvents, MatchesBruteForce) {
  oracle::Rng rng(52);
  const ReferenceEmbedder emb;
  const std::vector<std::string> lex = {"rally", "speech", "signing"};
  const LexiconActionExtractor ex(lex);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RecordEvent> q;
    for (std::size_t i = 0, n = 1 + oracle::pick(rng, 3); i < n; ++i) {
      q.push_back({{"x"}, oracle::coin(rng) ? oracle::random_text(rng, false) : "",
                   oracle::random_text(rng, false)});
    }
    std::vector<CandidateEvent> cands;
    for (std::size_t i = 0, n = oracle::pick(rng, 12); i < n; ++i) {
      cands.push_back({i * 3 + 1, oracle::coin(rng) ? "rally" : "",
                       oracle::random_text(rng, false)});
    }
    MatchConfig cfg;
    cfg.similarity = static_cast<SimilarityMode>(oracle::pick(rng, 3));
    cfg.w1 = static_cast<double>(oracle::pick(rng, 5)) / 4.0;
    cfg.w2 = 1.0 - cfg.w1;
    cfg.k_events = 1 + oracle::pick(rng, 6);
    std::vector<Scored> all;
    for (const auto& c : cands) {
      double best = 0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double s = oracle_event_score(q[i], c, cfg, ex);
        best = i == 0 ? s : std::max(best, s);
      }
      all.push_back({c.id, best});
    }
    const auto got = match_events(q, cands, cfg, emb, ex);
    const auto want = oracle::sort_oracle(all, cfg.k_events);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, want[i].id);
      EXPECT_NEAR(got[i].score, want[i].score, 1e-12);
    }
  }
}

TEST(MatchScenes, IdenticalAndEmpty) {
  const ReferenceEmbedder emb;
  const std::vector<CandidateScene> cands = {{3, "a rainy port at night", "", ""},
                                             {4, "a sunny plaza", "", ""}};
  const auto r = match_scenes("a sunny plaza", cands, MatchConfig{}, emb);
  EXPECT_EQ(r.at(0).id, 4u);
  EXPECT_NEAR(r[0].score, 1.0, 1e-12);
  EXPECT_TRUE(match_scenes("x", {}, MatchConfig{}, emb).empty());
}

TEST(MatchScenes, MatchesCosineSort) {
  oracle::Rng rng(53);
  const ReferenceEmbedder emb;
  for (int trial = 0; trial < 100; ++trial) {
    const std::string q = oracle::random_text(rng, true);
    std::vector<CandidateScene> cands;
    std::vector<Scored> all;
    for (std::size_t i = 0, n = oracle::pick(rng, 15); i < n; ++i) {
      cands.push_back({i * 7, oracle::random_text(rng, true), "", ""});
      all.push_back({i * 7, cosine(embed_reference(q), embed_reference(cands.back().context_text))});
    }
    MatchConfig cfg;
    cfg.k_scenes = 1 + oracle::pick(rng, 6);
    EXPECT_EQ(match_scenes(q, cands, cfg, emb), oracle::sort_oracle(all, cfg.k_scenes));
  }
}

TEST(RetrieveContext, ConjunctionAndTieBreak) {
  GraphStore g;
  const NodeId e1 = g.upsert_node(EntityNode{0, EntityType::Person, "e1"});
  const NodeId ev1 = g.upsert_node(EventNode{0, {e1}, "", "ev1"});
  const NodeId ev2 = g.upsert_node(EventNode{0, {e1}, "", "ev2"});
  const NodeId sc1 = g.upsert_node(SceneNode{0, {ev1}, "", "", "sc1"});
  const NodeId c1 = g.upsert_node(ContextNode{0, "c1", "d", "", ""});
  const NodeId c2 = g.upsert_node(ContextNode{0, "c2", "d", "", ""});
  for (NodeId x : {e1, ev1, sc1}) g.add_edge(c1, x, EdgeLabel::ContextOf);

  const std::vector<NodeId> ents = {e1};
  const std::vector<Scored> evs = {{ev1, 0.9}}, scs = {{sc1, 0.8}};
  auto r = retrieve_context(ents, evs, scs, g, MatchConfig{});
  ASSERT_EQ(r.ranked.size(), 1u);
  EXPECT_EQ(r.ranked[0].id, c1);
  EXPECT_NEAR(r.ranked[0].total, (1.0 + 0.9 + 0.8) / 3.0, 1e-15);

  // EE: both entity-linked, c1 via an event at 0.9, c2 at 0.4.
  g.add_edge(c2, e1, EdgeLabel::ContextOf);
  g.add_edge(c2, ev2, EdgeLabel::ContextOf);
  MatchConfig ee;
  ee.mode = MatchMode::EE;
  const std::vector<Scored> evs2 = {{ev1, 0.9}, {ev2, 0.4}};
  r = retrieve_context(ents, evs2, {}, g, ee);
  ASSERT_EQ(r.ranked.size(), 2u);
  EXPECT_EQ(r.ranked[0].id, c1);
  EXPECT_EQ(r.ranked[1].id, c2);
  EXPECT_FALSE(r.ranked[0].scene);

  const std::vector<Scored> tied = {{ev1, 0.5}, {ev2, 0.5}};
  r = retrieve_context(ents, tied, {}, g, ee);
  EXPECT_EQ(r.ranked[0].id, c1);
  EXPECT_EQ(r.ranked[0].total, r.ranked[1].total);
}

TEST(RetrieveContext, MatchesBruteForceScoring) {
  oracle::Rng rng(54);
  for (int trial = 0; trial < 60; ++trial) {
    const auto rg = oracle::random_graph(rng, 20 + oracle::pick(rng, 150));
    const auto ents = oracle::ids_of(rg, NodeKind::Entity);
    const auto evs = oracle::ids_of(rg, NodeKind::Event);
    const auto scs = oracle::ids_of(rg, NodeKind::Scene);
    std::vector<NodeId> matched;
    for (NodeId e : ents) {
      if (oracle::coin(rng, 0.3)) matched.push_back(e);
    }
    if (matched.empty()) matched.push_back(ents[0]);
    auto scored = [&](const std::vector<NodeId>& from) {
      std::vector<Scored> out;
      for (NodeId id : from) {
        if (oracle::coin(rng, 0.3)) out.push_back({id, static_cast<double>(oracle::pick(rng, 9)) / 8});
      }
      return out;
    };
    const auto top_ev = scored(evs), top_sc = scored(scs);
    MatchConfig cfg;
    cfg.mode = static_cast<MatchMode>(oracle::pick(rng, 3));
    if (cfg.mode == MatchMode::ES) cfg.similarity = SimilarityMode::Semantic;

    const auto r = retrieve_context(matched, top_ev, top_sc, rg.graph, cfg);

    std::vector<NodeId> ev_ids, sc_ids;
    if (cfg.uses_events()) for (const auto& s : top_ev) ev_ids.push_back(s.id);
    if (cfg.uses_scenes()) for (const auto& s : top_sc) sc_ids.push_back(s.id);
    const auto cands = oracle::context_set(rg.edges, {matched, ev_ids, sc_ids});
    EXPECT_EQ(r.candidates, cands);

    std::vector<std::pair<double, NodeId>> expect;
    for (NodeId c : cands) {
      const auto linked = oracle::scan_neighbors(rg, c, EdgeLabel::ContextOf, Direction::Out);
      auto has = [&](NodeId x) { return std::find(linked.begin(), linked.end(), x) != linked.end(); };
      double overlap = 0;
      for (NodeId m : matched) overlap += has(m) ? 1 : 0;
      double sum = overlap / static_cast<double>(matched.size());
      double parts = 1;
      auto best = [&](const std::vector<Scored>& top) {
        double b = 0;
        for (const auto& s : top) {
          if (has(s.id)) b = std::max(b, s.score);
        }
        return b;
      };
      if (cfg.uses_events()) sum += best(top_ev), parts += 1;
      if (cfg.uses_scenes()) sum += best(top_sc), parts += 1;
      expect.push_back({sum / parts, c});
    }
    std::sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    ASSERT_EQ(r.ranked.size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      EXPECT_EQ(r.ranked[i].id, expect[i].second);
      EXPECT_NEAR(r.ranked[i].total, expect[i].first, 1e-12);
    }
  }
}

TEST(Pipeline, VerbatimRecordRanksFirst) {
  EESRecord a;
  a.record_id = "a";
  a.entities = {{"Ada", "Person"}, {"Harbor", "Place"}};
  a.events = {{{"Ada"}, "", "Ada gives a speech by the harbor"}};
  a.scene = {"a windy harbor at dusk", "", ""};
  a.context = RecordContext{"ctx-a", "A", "", ""};
  EESRecord b = a;
  b.record_id = "b";
  b.entities = {{"Ada", "Person"}};
  b.events = {{{"Ada"}, "", "Ada buys bread"}};
  b.scene = {"a bakery in the morning", "", ""};
  b.context = RecordContext{"ctx-b", "B", "", ""};
  const std::vector<EESRecord> corpus = {b, a};
  const GraphStore g = build(corpus);
  const TypeNormalizer types;
  const ReferenceEmbedder emb;
  const LexiconActionExtractor ex;
  const auto r = run_pipeline(a, g, MatchConfig{}, Providers(emb, ex), types);
  ASSERT_EQ(r.ranked.size(), 2u);
  EXPECT_EQ(g.context(r.ranked[0].id).key, "ctx-a");
}

TEST(Pipeline, NoEntityMatch) {
  oracle::Rng rng(57);
  const std::vector<EESRecord> corpus = oracle::random_corpus(rng, 5);
  const GraphStore g = build(corpus);
  EESRecord q;
  q.entities = {{"Nobody Known", "Person"}};
  q.scene.description = "x";
  const TypeNormalizer types;
  const ReferenceEmbedder emb;
  const LexiconActionExtractor ex;
  const auto r = run_pipeline(q, g, MatchConfig{}, Providers(emb, ex), types);
  EXPECT_TRUE(r.no_entity_match);
  EXPECT_TRUE(r.ranked.empty());
  EXPECT_EQ(r.unmatched_entities, (std::vector<std::size_t>{0}));
}

TEST(Pipeline, EsModeSkipsEventEmbeddings) {
  oracle::Rng rng(55);
  const auto corpus = oracle::random_corpus(rng, 30);
  const GraphStore g = build(corpus);
  const TypeNormalizer types;
  const ReferenceEmbedder emb;
  CountingEmbedder events(emb), scenes(emb);
  const LexiconActionExtractor ex;
  MatchConfig es;
  es.mode = MatchMode::ES;
  es.similarity = SimilarityMode::Semantic;
  for (const auto& rec : corpus) run_pipeline(rec, g, es, Providers(events, scenes, ex), types);
  EXPECT_EQ(events.calls(), 0u);
  EXPECT_GT(scenes.calls(), 0u);
  for (const auto& rec : corpus) {
    run_pipeline(rec, g, MatchConfig{}, Providers(events, scenes, ex), types);
  }
  EXPECT_GT(events.calls(), 0u);
}

TEST(Pipeline, ModeMonotonicity) {
  oracle::Rng rng(56);
  const TypeNormalizer types;
  const ReferenceEmbedder emb;
  const LexiconActionExtractor ex;
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = oracle::random_corpus(rng, 25);
    const GraphStore g = build(corpus);
    const auto q = oracle::random_corpus(rng, 1)[0];
    MatchConfig ees_cfg, ee_cfg;
    ee_cfg.mode = MatchMode::EE;
    const auto a = run_pipeline(q, g, ees_cfg, Providers(emb, ex), types);
    const auto b = run_pipeline(q, g, ee_cfg, Providers(emb, ex), types);
    if (a.no_entity_match) continue;
    const auto all = oracle::context_set(oracle::edge_set(g), {a.matched_entities});
    EXPECT_TRUE(std::includes(b.candidates.begin(), b.candidates.end(), a.candidates.begin(),
                              a.candidates.end()));
    EXPECT_TRUE(std::includes(all.begin(), all.end(), b.candidates.begin(), b.candidates.end()));
  }
}
