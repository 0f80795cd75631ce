#pragma once
// Staged matching of a query record against the graph:
//
//   1. normalize entity types, look entities up by (type, name)
//   2. gather events and scenes reachable from the matched entities
//   3. score events (action + description similarity) and scenes, keep top k
//   4. collect contexts linked to the survivors and rank them

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ees/graph_store.hpp"
#include "ees/record.hpp"
#include "ees/similarity.hpp"

namespace ees {

enum class MatchMode : std::uint8_t { ES, EE, EES };
enum class SimilarityMode : std::uint8_t { Semantic, Action, SemanticAction };

std::string_view to_string(MatchMode mode);
std::string_view to_string(SimilarityMode mode);
std::optional<MatchMode> parse_match_mode(std::string_view s);
std::optional<SimilarityMode> parse_similarity_mode(std::string_view s);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MatchConfig {
  MatchMode mode = MatchMode::EES;
  SimilarityMode similarity = SimilarityMode::SemanticAction;
  double w1 = 0.5;  // action weight
  double w2 = 0.5;  // description weight
  std::size_t k_events = 5;
  std::size_t k_scenes = 5;

  // Throws ConfigError.
  void validate() const;

  bool uses_events() const { return mode != MatchMode::ES; }
  bool uses_scenes() const { return mode != MatchMode::EE; }

  struct Weights {
    double action;
    double semantic;
  };
  // Semantic-only forces (0, 1), action-only (1, 0).
  Weights effective_weights() const;
};

// key=value lines (mode, similarity, w1, w2, k_events, k_scenes); '#'
// comments. A lone w1 or w2 implies the other as its complement, and
// mode=ES without an explicit similarity selects semantic.
MatchConfig parse_match_config(std::string_view text);
MatchConfig load_match_config(const std::filesystem::path& path);

// Maps raw extractor types onto the six canonical categories. Lookup is on
// the trimmed, NFC, ASCII-lowercased string; unknown types become Other.
class TypeNormalizer {
 public:
  TypeNormalizer();

  void add_alias(std::string_view raw, EntityType type);
  EntityType normalize(std::string_view raw) const;

  // Lines of `raw = Canonical`, added on top of the defaults.
  static TypeNormalizer from_file(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, EntityType> aliases_;
};

struct Providers {
  const EmbeddingProvider& events;
  const EmbeddingProvider& scenes;
  const ActionExtractor& actions;

  Providers(const EmbeddingProvider& embedder, const ActionExtractor& extractor)
      : events(embedder), scenes(embedder), actions(extractor) {}
  Providers(const EmbeddingProvider& event_embedder, const EmbeddingProvider& scene_embedder,
            const ActionExtractor& extractor)
      : events(event_embedder), scenes(scene_embedder), actions(extractor) {}
};

struct EntityMatch {
  std::vector<NodeId> matched;           // ascending, distinct
  std::vector<std::size_t> unmatched;    // indices into the query entity list
};

EntityMatch match_entities(std::span<const RecordEntity> query_entities, const GraphStore& graph,
                           const TypeNormalizer& types);

struct CandidateEvent {
  NodeId id = 0;
  std::string action;
  std::string description;
};

struct CandidateScene {
  NodeId id = 0;
  std::string context_text;
  std::string location;
  std::string time;
};

struct Candidates {
  std::vector<CandidateEvent> events;
  std::vector<CandidateScene> scenes;
};

// Events and scenes reachable from the entities, via the stage-two queries.
Candidates gather_candidates(std::span<const NodeId> entity_ids, const GraphStore& graph,
                             bool events, bool scenes);

// A candidate's score is its best S_EV over the query events.
std::vector<Scored> match_events(std::span<const RecordEvent> query_events,
                                 std::span<const CandidateEvent> candidates,
                                 const MatchConfig& config, const EmbeddingProvider& provider,
                                 const ActionExtractor& extractor);

std::vector<Scored> match_scenes(std::string_view query_scene,
                                 std::span<const CandidateScene> candidates,
                                 const MatchConfig& config, const EmbeddingProvider& provider);

struct RankedContext {
  NodeId id = 0;
  double total = 0.0;
  double entity_overlap = 0.0;
  std::optional<double> event;
  std::optional<double> scene;
};

struct ContextResult {
  std::vector<RankedContext> ranked;
  std::vector<NodeId> candidates;  // the context candidate set, ascending
  std::vector<NodeId> matched_entities;
  std::vector<std::size_t> unmatched_entities;
  std::vector<Scored> top_events;
  std::vector<Scored> top_scenes;
  bool no_entity_match = false;
};

// Total = mean of the active components: entity overlap |linked ∩ matched| /
// |matched|, best linked top-k event score, best linked top-k scene score.
ContextResult retrieve_context(std::span<const NodeId> matched_entities,
                               std::span<const Scored> top_events,
                               std::span<const Scored> top_scenes, const GraphStore& graph,
                               const MatchConfig& config);

ContextResult run_pipeline(const EESRecord& record, const GraphStore& graph,
                           const MatchConfig& config, const Providers& providers,
                           const TypeNormalizer& types);

}  // namespace ees
