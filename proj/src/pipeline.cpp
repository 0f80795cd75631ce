#include "ees/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ees/kernels.hpp"
#include "ees/query.hpp"
#include "ees/text.hpp"

namespace ees {

std::string_view to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::ES: return "ES";
    case MatchMode::EE: return "EE";
    case MatchMode::EES: return "EES";
  }
  return "?";
}

std::string_view to_string(SimilarityMode mode) {
  switch (mode) {
    case SimilarityMode::Semantic: return "semantic";
    case SimilarityMode::Action: return "action";
    case SimilarityMode::SemanticAction: return "semantic+action";
  }
  return "?";
}

std::optional<MatchMode> parse_match_mode(std::string_view s) {
  for (MatchMode m : {MatchMode::ES, MatchMode::EE, MatchMode::EES}) {
    if (text::ascii_lower(to_string(m)) == text::ascii_lower(s)) return m;
  }
  return std::nullopt;
}

std::optional<SimilarityMode> parse_similarity_mode(std::string_view s) {
  for (SimilarityMode m :
       {SimilarityMode::Semantic, SimilarityMode::Action, SimilarityMode::SemanticAction}) {
    if (to_string(m) == text::ascii_lower(s)) return m;
  }
  return std::nullopt;
}

void MatchConfig::validate() const {
  if (mode == MatchMode::ES && similarity != SimilarityMode::Semantic) {
    throw ConfigError("ES mode has no event stage; similarity must be semantic");
  }
  if (!(w1 >= 0.0) || !(w2 >= 0.0) || std::abs(w1 + w2 - 1.0) > 1e-9) {
    throw ConfigError("w1 and w2 must be non-negative and sum to 1");
  }
  if (k_events == 0 || k_scenes == 0) throw ConfigError("k_events and k_scenes must be >= 1");
}

MatchConfig::Weights MatchConfig::effective_weights() const {
  switch (similarity) {
    case SimilarityMode::Semantic: return {0.0, 1.0};
    case SimilarityMode::Action: return {1.0, 0.0};
    case SimilarityMode::SemanticAction: return {w1, w2};
  }
  return {w1, w2};
}

namespace {

double parse_double(std::string_view v, std::string_view key, std::size_t line) {
  double d = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": " + std::string(key) +
                      " expects a number, got '" + std::string(v) + "'");
  }
  return d;
}

std::size_t parse_count(std::string_view v, std::string_view key, std::size_t line) {
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": " + std::string(key) +
                      " expects a positive integer, got '" + std::string(v) + "'");
  }
  return n;
}

}  // namespace

MatchConfig parse_match_config(std::string_view src) {
  MatchConfig c;
  bool similarity_set = false, w1_set = false, w2_set = false;
  std::size_t lineno = 0;
  for (auto raw : text::split(src, '\n')) {
    ++lineno;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    auto key = text::trim(line.substr(0, eq));
    auto value = text::trim(line.substr(eq + 1));
    if (key == "mode") {
      auto m = parse_match_mode(value);
      if (!m) throw ConfigError("line " + std::to_string(lineno) + ": mode must be ES, EE or EES");
      c.mode = *m;
    } else if (key == "similarity") {
      auto m = parse_similarity_mode(value);
      if (!m) {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": similarity must be semantic, action or semantic+action");
      }
      c.similarity = *m;
      similarity_set = true;
    } else if (key == "w1") {
      c.w1 = parse_double(value, key, lineno);
      w1_set = true;
    } else if (key == "w2") {
      c.w2 = parse_double(value, key, lineno);
      w2_set = true;
    } else if (key == "k_events") {
      c.k_events = parse_count(value, key, lineno);
    } else if (key == "k_scenes") {
      c.k_scenes = parse_count(value, key, lineno);
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + std::string(key) +
                        "'");
    }
  }
  if (w1_set && !w2_set) c.w2 = 1.0 - c.w1;
  if (w2_set && !w1_set) c.w1 = 1.0 - c.w2;
  if (c.mode == MatchMode::ES && !similarity_set) c.similarity = SimilarityMode::Semantic;
  c.validate();
  return c;
}

MatchConfig load_match_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_match_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------ types

namespace {

std::string alias_key(std::string_view raw) { return text::ascii_lower(text::normalize(raw)); }

}  // namespace

TypeNormalizer::TypeNormalizer() {
  const std::pair<EntityType, std::vector<std::string_view>> defaults[] = {
      {EntityType::Person,
       {"person", "character", "people", "human", "individual", "figure", "人物", "人"}},
      {EntityType::Organization,
       {"organization", "organisation", "org", "company", "institution", "agency", "group",
        "组织", "机构", "公司"}},
      {EntityType::Location,
       {"location", "place", "geographical area", "geographic area", "area", "region", "country",
        "city", "gpe", "loc", "地点", "位置", "地区"}},
      {EntityType::Object,
       {"object", "item", "entity", "thing", "product", "food", "物品", "物体", "物"}},
      {EntityType::Document, {"document", "file", "report", "文件", "文档"}},
      {EntityType::Other, {"other", "misc", "其他"}},
  };
  for (const auto& [type, names] : defaults) {
    for (auto n : names) add_alias(n, type);
  }
}

void TypeNormalizer::add_alias(std::string_view raw, EntityType type) {
  aliases_[alias_key(raw)] = type;
}

EntityType TypeNormalizer::normalize(std::string_view raw) const {
  if (auto it = aliases_.find(alias_key(raw)); it != aliases_.end()) return it->second;
  return EntityType::Other;
}

TypeNormalizer TypeNormalizer::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read type aliases " + path.string());
  TypeNormalizer n;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    auto type = eq == std::string_view::npos ? std::nullopt
                                             : parse_entity_type(text::trim(t.substr(eq + 1)));
    if (!type) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'raw = Person|Organization|Location|Object|Document|Other'");
    }
    n.add_alias(text::trim(t.substr(0, eq)), *type);
  }
  return n;
}

// ------------------------------------------------------------ stages

EntityMatch match_entities(std::span<const RecordEntity> query_entities, const GraphStore& graph,
                           const TypeNormalizer& types) {
  if (query_entities.empty()) throw std::invalid_argument("query has no entities");
  std::vector<query::EntityRef> refs;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < query_entities.size(); ++i) {
    auto name = text::normalize(query_entities[i].name);
    if (name.empty()) continue;
    refs.push_back({std::move(name), types.normalize(query_entities[i].type)});
    usable.push_back(i);
  }

  EntityMatch m;
  std::set<std::pair<std::string, std::string>> found;
  if (!refs.empty()) {
    auto table = query::run(query::build_entity_query(refs), graph);
    for (const auto& row : table.rows) {
      m.matched.push_back(std::get<NodeId>(row[0]));
      found.emplace(std::get<std::string>(row[1]), std::get<std::string>(row[2]));
    }
  }
  std::sort(m.matched.begin(), m.matched.end());
  m.matched.erase(std::unique(m.matched.begin(), m.matched.end()), m.matched.end());

  std::set<std::size_t> hit;
  for (std::size_t j = 0; j < refs.size(); ++j) {
    if (found.contains({std::string(to_string(refs[j].type)), refs[j].name})) hit.insert(usable[j]);
  }
  for (std::size_t i = 0; i < query_entities.size(); ++i) {
    if (!hit.contains(i)) m.unmatched.push_back(i);
  }
  return m;
}

Candidates gather_candidates(std::span<const NodeId> entity_ids, const GraphStore& graph,
                             bool events, bool scenes) {
  Candidates out;
  if (entity_ids.empty()) return out;
  auto q = query::build_event_scene_query(entity_ids);
  if (events) {
    for (const auto& row : query::run(q.events, graph).rows) {
      out.events.push_back({std::get<NodeId>(row[0]), std::get<std::string>(row[1]),
                            std::get<std::string>(row[2])});
    }
  }
  if (scenes) {
    for (const auto& row : query::run(q.scenes, graph).rows) {
      out.scenes.push_back({std::get<NodeId>(row[0]), std::get<std::string>(row[1]),
                            std::get<std::string>(row[2]), std::get<std::string>(row[3])});
    }
  }
  return out;
}

namespace {

// Flattens each event's action phrases, remembering which event owns each.
void collect_actions(std::vector<std::string>& phrases, std::vector<std::size_t>& owner,
                     std::size_t index, std::string_view action, std::string_view description,
                     const ActionExtractor& extractor) {
  for (auto& p : event_actions(action, description, extractor)) {
    phrases.push_back(std::move(p));
    owner.push_back(index);
  }
}

}  // namespace

std::vector<Scored> match_events(std::span<const RecordEvent> query_events,
                                 std::span<const CandidateEvent> candidates,
                                 const MatchConfig& config, const EmbeddingProvider& provider,
                                 const ActionExtractor& extractor) {
  config.validate();
  if (query_events.empty() || candidates.empty()) return {};
  const auto [w_action, w_semantic] = config.effective_weights();
  const std::size_t nq = query_events.size(), nc = candidates.size();

  std::vector<double> semantic(nq * nc, 0.0);
  if (w_semantic > 0.0) {
    std::vector<std::string> qd, cd;
    for (const auto& e : query_events) qd.push_back(e.description);
    for (const auto& c : candidates) cd.push_back(c.description);
    semantic = kernels::cosine_matrix(provider.embed_batch(qd), provider.embed_batch(cd));
  }

  std::vector<double> action(nq * nc, 0.0);
  if (w_action > 0.0) {
    std::vector<std::string> qp, cp;
    std::vector<std::size_t> qo, co;
    for (std::size_t i = 0; i < nq; ++i) {
      collect_actions(qp, qo, i, query_events[i].action, query_events[i].description, extractor);
    }
    for (std::size_t j = 0; j < nc; ++j) {
      collect_actions(cp, co, j, candidates[j].action, candidates[j].description, extractor);
    }
    const auto m = kernels::cosine_matrix(provider.embed_batch(qp), provider.embed_batch(cp));
    action = kernels::block_max(m, qp.size(), cp.size(), qo, nq, co, nc);
  }

  std::vector<Scored> scored;
  scored.reserve(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < nq; ++i) {
      const double s = event_score(action[i * nc + j], semantic[i * nc + j], w_action, w_semantic);
      if (i == 0 || s > best) best = s;
    }
    scored.push_back({candidates[j].id, best});
  }
  return top_k(std::move(scored), config.k_events);
}

std::vector<Scored> match_scenes(std::string_view query_scene,
                                 std::span<const CandidateScene> candidates,
                                 const MatchConfig& config, const EmbeddingProvider& provider) {
  config.validate();
  if (candidates.empty()) return {};
  std::vector<std::string> texts;
  for (const auto& c : candidates) texts.push_back(c.context_text);
  const Embedding q[] = {provider.embed(query_scene)};
  const auto sims = kernels::cosine_matrix(q, provider.embed_batch(texts));
  std::vector<Scored> scored;
  for (std::size_t j = 0; j < candidates.size(); ++j) scored.push_back({candidates[j].id, sims[j]});
  return top_k(std::move(scored), config.k_scenes);
}

ContextResult retrieve_context(std::span<const NodeId> matched_entities,
                               std::span<const Scored> top_events,
                               std::span<const Scored> top_scenes, const GraphStore& graph,
                               const MatchConfig& config) {
  if (matched_entities.empty() && top_events.empty() && top_scenes.empty()) {
    throw std::invalid_argument("context retrieval needs matched entities, events or scenes");
  }
  ContextResult result;
  result.matched_entities.assign(matched_entities.begin(), matched_entities.end());
  std::sort(result.matched_entities.begin(), result.matched_entities.end());
  result.matched_entities.erase(
      std::unique(result.matched_entities.begin(), result.matched_entities.end()),
      result.matched_entities.end());
  if (config.uses_events()) result.top_events.assign(top_events.begin(), top_events.end());
  if (config.uses_scenes()) result.top_scenes.assign(top_scenes.begin(), top_scenes.end());
  if (result.matched_entities.empty()) {
    result.no_entity_match = true;
    return result;
  }

  std::vector<NodeId> event_ids, scene_ids;
  for (const auto& s : result.top_events) event_ids.push_back(s.id);
  for (const auto& s : result.top_scenes) scene_ids.push_back(s.id);
  const auto table =
      query::run(query::build_context_query(result.matched_entities, event_ids, scene_ids), graph);
  for (const auto& row : table.rows) result.candidates.push_back(std::get<NodeId>(row[0]));

  const std::set<NodeId> matched(result.matched_entities.begin(), result.matched_entities.end());
  for (NodeId c : result.candidates) {
    const auto linked = graph.neighbors(c, EdgeLabel::ContextOf, Direction::Out);
    const std::set<NodeId> linked_set(linked.begin(), linked.end());
    auto best_linked = [&](const std::vector<Scored>& top) {
      double best = 0.0;
      bool any = false;
      for (const auto& s : top) {
        if (linked_set.contains(s.id) && (!any || s.score > best)) {
          best = s.score;
          any = true;
        }
      }
      return best;
    };

    RankedContext rc;
    rc.id = c;
    std::size_t overlap = 0;
    for (NodeId e : linked) overlap += matched.contains(e) ? 1 : 0;
    rc.entity_overlap = static_cast<double>(overlap) / static_cast<double>(matched.size());
    double sum = rc.entity_overlap;
    double parts = 1.0;
    if (config.uses_events()) {
      rc.event = best_linked(result.top_events);
      sum += *rc.event;
      parts += 1.0;
    }
    if (config.uses_scenes()) {
      rc.scene = best_linked(result.top_scenes);
      sum += *rc.scene;
      parts += 1.0;
    }
    rc.total = sum / parts;
    result.ranked.push_back(rc);
  }
  std::sort(result.ranked.begin(), result.ranked.end(),
            [](const RankedContext& a, const RankedContext& b) {
              if (a.total != b.total) return a.total > b.total;
              return a.id < b.id;
            });
  return result;
}

ContextResult run_pipeline(const EESRecord& record, const GraphStore& graph,
                           const MatchConfig& config, const Providers& providers,
                           const TypeNormalizer& types) {
  config.validate();
  const EntityMatch em = match_entities(record.entities, graph, types);
  if (em.matched.empty()) {
    ContextResult r;
    r.no_entity_match = true;
    r.unmatched_entities = em.unmatched;
    return r;
  }

  const Candidates cands =
      gather_candidates(em.matched, graph, config.uses_events(), config.uses_scenes());
  std::vector<Scored> top_events, top_scenes;
  if (config.uses_events()) {
    top_events = match_events(record.events, cands.events, config, providers.events,
                              providers.actions);
  }
  if (config.uses_scenes()) {
    top_scenes = match_scenes(record.scene.description, cands.scenes, config, providers.scenes);
  }
  ContextResult r = retrieve_context(em.matched, top_events, top_scenes, graph, config);
  r.unmatched_entities = em.unmatched;
  return r;
}

}  // namespace ees
