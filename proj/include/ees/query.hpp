#pragma once
// A small Cypher subset, enough to express the three retrieval stages.
//
//   query   := clause ((UNION | INTERSECT) clause)*      one combinator per query
//   clause  := MATCH pattern [WHERE var.id IN [int, ...]] RETURN proj, ...
//   pattern := (var:Label {key:"str", ...}) ( -[:EDGE]->(var:Label) )*
//   proj    := var.key | var.id
//
// Keywords are case-insensitive, whitespace is insignificant and string
// literals take backslash escapes. Results have set semantics: rows are
// distinct and sorted ascending, column by column.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ees/graph_store.hpp"

namespace ees::query {

struct NodePattern {
  std::string var;
  NodeKind label = NodeKind::Entity;
  std::vector<std::pair<std::string, std::string>> props;
  bool operator==(const NodePattern&) const = default;
};

struct Hop {
  EdgeLabel label = EdgeLabel::ParticipatesIn;
  NodePattern target;
  bool operator==(const Hop&) const = default;
};

struct IdFilter {
  std::string var;
  std::vector<NodeId> ids;
  bool operator==(const IdFilter&) const = default;
};

struct Projection {
  std::string var;
  std::string key;  // "id" or a text property
  bool operator==(const Projection&) const = default;
};

struct Clause {
  NodePattern anchor;
  std::vector<Hop> hops;
  std::optional<IdFilter> where;
  std::vector<Projection> projections;
  bool operator==(const Clause&) const = default;
};

enum class Combinator : std::uint8_t { Union, Intersect };

struct QueryPlan {
  std::vector<Clause> clauses;
  Combinator combinator = Combinator::Union;
  bool operator==(const QueryPlan&) const = default;
};

using Value = std::variant<NodeId, std::string>;
using Row = std::vector<Value>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  bool operator==(const ResultTable&) const = default;
};

class QueryError : public std::runtime_error {
 public:
  QueryError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class SyntaxError : public QueryError {
 public:
  SyntaxError(std::size_t position, std::vector<std::string> expected, std::string found);
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::vector<std::string> expected_;
};

// Unknown label or property, undeclared variable, illegal hop.
class SchemaError : public QueryError {
 public:
  using QueryError::QueryError;
};

// Text properties each label exposes besides `id`.
std::span<const std::string_view> properties_of(NodeKind label);

QueryPlan parse(std::string_view text);
std::string render(const QueryPlan& plan);

// Throws SchemaError if the plan was built by hand and is not valid.
void validate(const QueryPlan& plan);

ResultTable execute(const QueryPlan& plan, const GraphStore& graph);
inline ResultTable run(std::string_view text, const GraphStore& graph) {
  return execute(parse(text), graph);
}

struct EntityRef {
  std::string name;
  EntityType type = EntityType::Other;
};

// Entity lookup: one clause per entity, pinned on type and name.
std::string build_entity_query(std::span<const EntityRef> entities);

struct EventSceneQueries {
  std::string events;  // RETURN v.id, v.action, v.description
  std::string scenes;  // RETURN s.id, s.context_text, s.location, s.time
};
EventSceneQueries build_event_scene_query(std::span<const NodeId> entity_ids);

// Contexts linked to at least one id of every non-empty list.
std::string build_context_query(std::span<const NodeId> entity_ids,
                                std::span<const NodeId> event_ids,
                                std::span<const NodeId> scene_ids);

}  // namespace ees::query
