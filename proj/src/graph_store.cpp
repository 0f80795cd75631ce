#include "ees/graph_store.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "ees/text.hpp"

namespace ees {

namespace {

constexpr std::string_view kEntityTypeNames[] = {"Person",   "Organization", "Location",
                                                 "Object",   "Document",     "Other"};
constexpr std::string_view kEdgeLabelNames[] = {"PARTICIPATES_IN", "PART_OF", "CONTEXT_OF"};

std::string describe(NodeId id) { return "node " + std::to_string(id); }

}  // namespace

std::string_view to_string(EntityType type) {
  return kEntityTypeNames[static_cast<std::size_t>(type)];
}

std::optional<EntityType> parse_entity_type(std::string_view name) {
  for (EntityType t : kAllEntityTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Entity: return "Entity";
    case NodeKind::Event: return "Event";
    case NodeKind::Scene: return "Scene";
    case NodeKind::Context: return "Context";
  }
  return "?";
}

std::string_view to_string(EdgeLabel label) {
  return kEdgeLabelNames[static_cast<std::size_t>(label)];
}

std::optional<EdgeLabel> parse_edge_label(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kEdgeLabelNames); ++i) {
    if (kEdgeLabelNames[i] == name) return static_cast<EdgeLabel>(i);
  }
  return std::nullopt;
}

NodeKind kind_of(const Node& node) { return static_cast<NodeKind>(node.index()); }

NodeId id_of(const Node& node) {
  return std::visit([](const auto& n) { return n.id; }, node);
}

NodeKind edge_source_kind(EdgeLabel label) {
  switch (label) {
    case EdgeLabel::ParticipatesIn: return NodeKind::Entity;
    case EdgeLabel::PartOf: return NodeKind::Event;
    case EdgeLabel::ContextOf: return NodeKind::Context;
  }
  return NodeKind::Entity;
}

bool edge_target_allowed(EdgeLabel label, NodeKind target) {
  switch (label) {
    case EdgeLabel::ParticipatesIn: return target == NodeKind::Event;
    case EdgeLabel::PartOf: return target == NodeKind::Scene;
    case EdgeLabel::ContextOf: return target != NodeKind::Context;
  }
  return false;
}

SnapshotError::SnapshotError(std::size_t line, const std::string& message)
    : GraphError("snapshot line " + std::to_string(line) + ": " + message), line_(line) {}

std::size_t GraphStore::EntityKeyHash::operator()(
    const std::pair<EntityType, std::string>& key) const {
  return std::hash<std::string>{}(key.second) * 31 + static_cast<std::size_t>(key.first);
}

const Node& GraphStore::node(NodeId id) const {
  if (!contains(id)) throw UnknownNode("unknown " + describe(id));
  return nodes_[id];
}

void GraphStore::require_kind(NodeId id, NodeKind kind, std::string_view role) const {
  if (!contains(id)) {
    throw DanglingReference(std::string(role) + " references nonexistent " + describe(id));
  }
  if (kind_of(nodes_[id]) != kind) {
    throw KindMismatch(std::string(role) + " expects " + std::string(to_string(kind)) + " but " +
                       describe(id) + " is " + std::string(to_string(kind_of(nodes_[id]))));
  }
}

const EntityNode& GraphStore::entity(NodeId id) const {
  require_kind(id, NodeKind::Entity, "entity()");
  return std::get<EntityNode>(nodes_[id]);
}
const EventNode& GraphStore::event(NodeId id) const {
  require_kind(id, NodeKind::Event, "event()");
  return std::get<EventNode>(nodes_[id]);
}
const SceneNode& GraphStore::scene(NodeId id) const {
  require_kind(id, NodeKind::Scene, "scene()");
  return std::get<SceneNode>(nodes_[id]);
}
const ContextNode& GraphStore::context(NodeId id) const {
  require_kind(id, NodeKind::Context, "context()");
  return std::get<ContextNode>(nodes_[id]);
}

namespace {

void dedup_stable(std::vector<NodeId>& ids) {
  std::unordered_set<NodeId> seen;
  std::erase_if(ids, [&](NodeId id) { return !seen.insert(id).second; });
}

void require_text(std::string_view value, std::string_view what) {
  if (text::trim(value).empty()) {
    throw InvariantViolation(std::string(what) + " must be non-empty");
  }
}

}  // namespace

NodeId GraphStore::upsert_node(Node node) { return insert(std::move(node), true); }

NodeId GraphStore::insert(Node node, bool upsert, bool check_refs) {
  const NodeId id = nodes_.size();

  switch (kind_of(node)) {
    case NodeKind::Entity: {
      auto& e = std::get<EntityNode>(node);
      e.name = text::normalize(e.name);
      require_text(e.name, "entity name");
      auto key = std::make_pair(e.type, e.name);
      if (auto it = entity_index_.find(key); it != entity_index_.end()) {
        if (upsert) return it->second;
        throw InvariantViolation("duplicate entity (" + std::string(to_string(e.type)) + ", " +
                                 e.name + ")");
      }
      entity_index_.emplace(std::move(key), id);
      break;
    }
    case NodeKind::Event: {
      auto& ev = std::get<EventNode>(node);
      require_text(ev.description, "event description");
      if (ev.entity_ids.empty()) throw InvariantViolation("event needs at least one entity");
      dedup_stable(ev.entity_ids);
      if (check_refs) {
        for (NodeId e : ev.entity_ids) require_kind(e, NodeKind::Entity, "event entity_ids");
      }
      break;
    }
    case NodeKind::Scene: {
      auto& sc = std::get<SceneNode>(node);
      require_text(sc.context_text, "scene context");
      dedup_stable(sc.event_ids);
      if (check_refs) {
        for (NodeId ev : sc.event_ids) require_kind(ev, NodeKind::Event, "scene event_ids");
      }
      break;
    }
    case NodeKind::Context: {
      auto& c = std::get<ContextNode>(node);
      require_text(c.description, "context description");
      if (!c.key.empty()) {
        if (context_index_.contains(c.key)) {
          throw InvariantViolation("duplicate context key '" + c.key + "'");
        }
        context_index_.emplace(c.key, id);
      }
      break;
    }
  }

  std::visit([id](auto& n) { n.id = id; }, node);
  nodes_.push_back(std::move(node));
  out_.emplace_back();
  in_.emplace_back();

  if (upsert) {
    if (const auto* ev = std::get_if<EventNode>(&nodes_.back())) {
      for (NodeId e : std::vector<NodeId>(ev->entity_ids)) add_edge(e, id, EdgeLabel::ParticipatesIn);
    } else if (const auto* sc = std::get_if<SceneNode>(&nodes_.back())) {
      for (NodeId ev : std::vector<NodeId>(sc->event_ids)) add_edge(ev, id, EdgeLabel::PartOf);
    }
  }
  return id;
}

void GraphStore::check_member_refs() const {
  for (const auto& n : nodes_) {
    if (const auto* ev = std::get_if<EventNode>(&n)) {
      for (NodeId e : ev->entity_ids) require_kind(e, NodeKind::Entity, "event entity_ids");
    } else if (const auto* sc = std::get_if<SceneNode>(&n)) {
      for (NodeId e : sc->event_ids) require_kind(e, NodeKind::Event, "scene event_ids");
    }
  }
}

void GraphStore::add_edge(NodeId src, NodeId dst, EdgeLabel label) {
  if (!contains(src)) throw DanglingReference("edge source " + describe(src) + " does not exist");
  if (!contains(dst)) throw DanglingReference("edge target " + describe(dst) + " does not exist");
  const NodeKind src_kind = kind_of(nodes_[src]);
  const NodeKind dst_kind = kind_of(nodes_[dst]);
  if (src_kind != edge_source_kind(label) || !edge_target_allowed(label, dst_kind)) {
    throw KindMismatch(std::string(to_string(label)) + " cannot connect " +
                       std::string(to_string(src_kind)) + " to " +
                       std::string(to_string(dst_kind)));
  }

  auto& out = out_[src];
  const Adjacent fwd{label, dst};
  auto pos = std::lower_bound(out.begin(), out.end(), fwd);
  if (pos != out.end() && *pos == fwd) return;
  out.insert(pos, fwd);
  auto& in = in_[dst];
  const Adjacent back{label, src};
  in.insert(std::lower_bound(in.begin(), in.end(), back), back);
  ++edge_count_;

  if (label == EdgeLabel::ParticipatesIn) {
    auto& ids = std::get<EventNode>(nodes_[dst]).entity_ids;
    if (std::find(ids.begin(), ids.end(), src) == ids.end()) ids.push_back(src);
  } else if (label == EdgeLabel::PartOf) {
    auto& ids = std::get<SceneNode>(nodes_[dst]).event_ids;
    if (std::find(ids.begin(), ids.end(), src) == ids.end()) ids.push_back(src);
  }
}

std::vector<EntityNode> GraphStore::find_entities(EntityType type, std::string_view name) const {
  auto it = entity_index_.find(std::make_pair(type, text::normalize(name)));
  if (it == entity_index_.end()) return {};
  return {std::get<EntityNode>(nodes_[it->second])};
}

std::optional<NodeId> GraphStore::find_context(std::string_view key) const {
  if (auto it = context_index_.find(std::string(key)); it != context_index_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::vector<NodeId> GraphStore::neighbors(NodeId id, EdgeLabel label, Direction direction) const {
  if (!contains(id)) throw UnknownNode("unknown " + describe(id));
  const auto& adj = direction == Direction::Out ? out_[id] : in_[id];
  auto lo = std::lower_bound(adj.begin(), adj.end(), Adjacent{label, 0});
  std::vector<NodeId> out;
  for (auto it = lo; it != adj.end() && it->label == label; ++it) out.push_back(it->other);
  return out;
}

std::vector<Edge> GraphStore::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId src = 0; src < out_.size(); ++src) {
    for (const auto& a : out_[src]) out.push_back({src, a.other, a.label});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> GraphStore::ids_of_kind(NodeKind kind) const {
  std::vector<NodeId> out;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (kind_of(nodes_[id]) == kind) out.push_back(id);
  }
  return out;
}

std::vector<std::string> GraphStore::membership_violations() const {
  std::vector<std::string> out;
  auto same_set = [](std::vector<NodeId> a, std::vector<NodeId> b) {
    std::sort(a.begin(), a.end());
    return a == b;
  };
  for (const auto& n : nodes_) {
    if (const auto* ev = std::get_if<EventNode>(&n)) {
      if (!same_set(ev->entity_ids, neighbors(ev->id, EdgeLabel::ParticipatesIn, Direction::In))) {
        out.push_back(describe(ev->id) + ": entity_ids disagree with PARTICIPATES_IN edges");
      }
    } else if (const auto* sc = std::get_if<SceneNode>(&n)) {
      if (!same_set(sc->event_ids, neighbors(sc->id, EdgeLabel::PartOf, Direction::In))) {
        out.push_back(describe(sc->id) + ": event_ids disagree with PART_OF edges");
      }
    }
  }
  return out;
}

std::vector<std::string> GraphStore::check_invariants() const {
  std::vector<std::string> out = membership_violations();
  for (const auto& n : nodes_) {
    const auto* c = std::get_if<ContextNode>(&n);
    if (c == nullptr) continue;
    bool has[3] = {false, false, false};
    for (NodeId t : neighbors(c->id, EdgeLabel::ContextOf, Direction::Out)) {
      has[static_cast<std::size_t>(kind_of(nodes_[t]))] = true;
    }
    if (!has[0] || !has[1] || !has[2]) {
      out.push_back(describe(c->id) +
                    ": context must link at least one entity, one event and one scene");
    }
  }
  return out;
}

bool GraphStore::operator==(const GraphStore& other) const {
  return embedding_dim_ == other.embedding_dim_ && nodes_ == other.nodes_ && out_ == other.out_;
}

}  // namespace ees
