#pragma once
// Embedded typed property graph for the entity/event/scene/context model.
//
// Node kinds and their membership edges:
//   Entity  -PARTICIPATES_IN->  Event  -PART_OF->  Scene
//   Context -CONTEXT_OF-> Entity | Event | Scene
//
// Ids are dense and assigned in insertion order. Entities are unique on
// (type, normalized name); all other kinds always insert fresh nodes.
//
// Thread-safety: const member functions never mutate, so any number of
// readers may share a store. Writers need exclusive access.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace ees {

using NodeId = std::uint64_t;

enum class EntityType : std::uint8_t { Person, Organization, Location, Object, Document, Other };

inline constexpr EntityType kAllEntityTypes[] = {
    EntityType::Person,   EntityType::Organization, EntityType::Location,
    EntityType::Object,   EntityType::Document,     EntityType::Other};

std::string_view to_string(EntityType type);
// Exact canonical spelling only; raw extractor types go through TypeNormalizer.
std::optional<EntityType> parse_entity_type(std::string_view name);

enum class NodeKind : std::uint8_t { Entity, Event, Scene, Context };
std::string_view to_string(NodeKind kind);

enum class EdgeLabel : std::uint8_t { ParticipatesIn, PartOf, ContextOf };
std::string_view to_string(EdgeLabel label);
std::optional<EdgeLabel> parse_edge_label(std::string_view name);

enum class Direction : std::uint8_t { Out, In };

struct EntityNode {
  NodeId id = 0;
  EntityType type = EntityType::Other;
  std::string name;
  bool operator==(const EntityNode&) const = default;
};

struct EventNode {
  NodeId id = 0;
  std::vector<NodeId> entity_ids;
  std::string action;  // empty: derive from description on demand
  std::string description;
  bool operator==(const EventNode&) const = default;
};

struct SceneNode {
  NodeId id = 0;
  std::vector<NodeId> event_ids;
  std::string location;
  std::string time;
  std::string context_text;
  bool operator==(const SceneNode&) const = default;
};

struct ContextNode {
  NodeId id = 0;
  std::string key;  // external context id from the corpus; may be empty
  std::string description;
  std::string time;
  std::string location;
  bool operator==(const ContextNode&) const = default;
};

using Node = std::variant<EntityNode, EventNode, SceneNode, ContextNode>;

NodeKind kind_of(const Node& node);
NodeId id_of(const Node& node);

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeLabel label = EdgeLabel::ParticipatesIn;
  auto operator<=>(const Edge&) const = default;
};

// Source and target kinds an edge label permits.
NodeKind edge_source_kind(EdgeLabel label);
bool edge_target_allowed(EdgeLabel label, NodeKind target);

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DanglingReference : public GraphError {
 public:
  using GraphError::GraphError;
};
class KindMismatch : public GraphError {
 public:
  using GraphError::GraphError;
};
class InvariantViolation : public GraphError {
 public:
  using GraphError::GraphError;
};
class UnknownNode : public GraphError {
 public:
  using GraphError::GraphError;
};
class SnapshotError : public GraphError {
 public:
  SnapshotError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class GraphStore {
 public:
  // The node's own id field is ignored; the assigned id is returned.
  NodeId upsert_node(Node node);

  // Re-adding an existing edge is a no-op. Membership edges keep the
  // event/scene id lists in sync.
  void add_edge(NodeId src, NodeId dst, EdgeLabel label);

  std::vector<EntityNode> find_entities(EntityType type, std::string_view name) const;
  std::optional<NodeId> find_context(std::string_view key) const;

  // Ascending id order.
  std::vector<NodeId> neighbors(NodeId id, EdgeLabel label, Direction direction) const;

  bool contains(NodeId id) const { return id < nodes_.size(); }
  const Node& node(NodeId id) const;
  NodeKind kind(NodeId id) const { return kind_of(node(id)); }
  const EntityNode& entity(NodeId id) const;
  const EventNode& event(NodeId id) const;
  const SceneNode& scene(NodeId id) const;
  const ContextNode& context(NodeId id) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  // Sorted by (src, dst, label).
  std::vector<Edge> edges() const;
  std::vector<NodeId> ids_of_kind(NodeKind kind) const;

  // Human-readable description of every violated store invariant.
  std::vector<std::string> check_invariants() const;

  std::size_t embedding_dim() const { return embedding_dim_; }
  void set_embedding_dim(std::size_t dim) { embedding_dim_ = dim; }

  void write_snapshot(std::ostream& out) const;
  void save_snapshot(const std::filesystem::path& path) const;
  static GraphStore read_snapshot(std::istream& in);
  static GraphStore load_snapshot(const std::filesystem::path& path);

  bool operator==(const GraphStore& other) const;

 private:
  struct Adjacent {
    EdgeLabel label;
    NodeId other;
    auto operator<=>(const Adjacent&) const = default;
  };

  struct EntityKeyHash {
    std::size_t operator()(const std::pair<EntityType, std::string>& key) const;
  };

  NodeId insert(Node node, bool upsert, bool check_refs = true);
  void check_member_refs() const;
  void require_kind(NodeId id, NodeKind kind, std::string_view role) const;
  std::vector<std::string> membership_violations() const;

  std::vector<Node> nodes_;
  std::vector<std::vector<Adjacent>> out_;
  std::vector<std::vector<Adjacent>> in_;
  std::unordered_map<std::pair<EntityType, std::string>, NodeId, EntityKeyHash> entity_index_;
  std::unordered_map<std::string, NodeId> context_index_;
  std::size_t edge_count_ = 0;
  std::size_t embedding_dim_ = 0;
};

}  // namespace ees
