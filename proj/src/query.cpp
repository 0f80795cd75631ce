#include "ees/query.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "ees/text.hpp"

namespace ees::query {

QueryError::QueryError(std::size_t position, const std::string& message)
    : std::runtime_error(message), position_(position) {}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position, std::vector<std::string> expected, std::string found)
    : QueryError(position, "syntax error at offset " + std::to_string(position) + ": expected " +
                               join(expected, " or ") + ", found " + found),
      expected_(std::move(expected)) {}

namespace {

constexpr std::string_view kEntityProps[] = {"type", "name"};
constexpr std::string_view kEventProps[] = {"action", "description"};
constexpr std::string_view kSceneProps[] = {"context_text", "location", "time"};
constexpr std::string_view kContextProps[] = {"key", "description", "time", "location"};

std::optional<NodeKind> parse_label(std::string_view s) {
  for (NodeKind k : {NodeKind::Entity, NodeKind::Event, NodeKind::Scene, NodeKind::Context}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool has_property(NodeKind label, std::string_view key) {
  auto props = properties_of(label);
  return std::find(props.begin(), props.end(), key) != props.end();
}

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, Int, String, Punct, Arrow, End };

struct Token {
  Tok kind;
  std::string text;  // identifier, digits, decoded string, or punctuation
  std::size_t pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (text::is_space(c)) {
      ++i;
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), i});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Int, std::string(s.substr(i, j - i)), i});
      i = j;
    } else if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      for (;;) {
        if (j >= s.size()) throw SyntaxError(i, {"closing '\"'"}, "end of input");
        if (s[j] == '"') break;
        if (s[j] == '\\') {
          if (j + 1 >= s.size()) throw SyntaxError(j, {"escape character"}, "end of input");
          switch (s[j + 1]) {
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            default:
              throw SyntaxError(j, {"\\\"", "\\\\", "\\n", "\\t"},
                                "'\\" + std::string(1, s[j + 1]) + "'");
          }
          j += 2;
        } else {
          value += s[j++];
        }
      }
      out.push_back({Tok::String, std::move(value), i});
      i = j + 1;
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      out.push_back({Tok::Arrow, "->", i});
      i += 2;
    } else if (std::string_view("(){}[]:,.-").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), i});
      ++i;
    } else {
      throw SyntaxError(i, {"token"}, "'" + std::string(1, c) + "'");
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

// --------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  QueryPlan parse_query() {
    QueryPlan plan;
    plan.clauses.push_back(parse_clause());
    std::optional<Combinator> comb;
    while (peek().kind != Tok::End) {
      Combinator next;
      if (is_keyword("UNION")) {
        next = Combinator::Union;
      } else if (is_keyword("INTERSECT")) {
        next = Combinator::Intersect;
      } else {
        fail({"UNION", "INTERSECT", "end of input"});
      }
      if (comb && *comb != next) {
        throw SyntaxError(peek().pos, {*comb == Combinator::Union ? "UNION" : "INTERSECT"},
                          std::string(peek().text));
      }
      comb = next;
      advance();
      plan.clauses.push_back(parse_clause());
    }
    plan.combinator = comb.value_or(Combinator::Union);
    return plan;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& advance() { return toks_[i_++]; }

  bool is_keyword(std::string_view kw) const {
    return peek().kind == Tok::Ident && text::ascii_lower(peek().text) == text::ascii_lower(kw);
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.pos, std::move(expected), std::move(found));
  }

  void keyword(std::string_view kw) {
    if (!is_keyword(kw)) fail({std::string(kw)});
    advance();
  }

  void punct(char c) {
    if (peek().kind != Tok::Punct || peek().text[0] != c) fail({"'" + std::string(1, c) + "'"});
    advance();
  }

  bool at_punct(char c) const { return peek().kind == Tok::Punct && peek().text[0] == c; }

  const Token& ident(std::string_view what) {
    if (peek().kind != Tok::Ident) fail({std::string(what)});
    return advance();
  }

  NodePattern parse_node(bool allow_props) {
    NodePattern np;
    punct('(');
    np.var = ident("variable").text;
    punct(':');
    const Token& label = ident("label");
    auto kind = parse_label(label.text);
    if (!kind) throw SchemaError(label.pos, "unknown label '" + label.text + "'");
    np.label = *kind;
    if (allow_props && at_punct('{')) {
      advance();
      for (;;) {
        const Token& key = ident("property key");
        if (!has_property(np.label, key.text)) {
          throw SchemaError(key.pos, "unknown property '" + key.text + "' on " +
                                         std::string(to_string(np.label)));
        }
        for (const auto& [k, v] : np.props) {
          if (k == key.text) throw SchemaError(key.pos, "duplicate property '" + key.text + "'");
        }
        punct(':');
        if (peek().kind != Tok::String) fail({"string literal"});
        np.props.emplace_back(key.text, advance().text);
        if (at_punct(',')) {
          advance();
          continue;
        }
        if (at_punct('}')) break;
        fail({"','", "'}'"});
      }
      advance();
    }
    if (!at_punct(')')) fail(allow_props && np.props.empty() ? std::vector<std::string>{"'{'", "')'"}
                                                             : std::vector<std::string>{"')'"});
    advance();
    return np;
  }

  Clause parse_clause() {
    Clause c;
    keyword("MATCH");
    c.anchor = parse_node(true);
    while (at_punct('-')) {
      advance();
      punct('[');
      punct(':');
      const Token& lt = ident("edge label");
      auto label = parse_edge_label(lt.text);
      if (!label) throw SchemaError(lt.pos, "unknown edge label '" + lt.text + "'");
      punct(']');
      if (peek().kind != Tok::Arrow) fail({"'->'"});
      advance();
      c.hops.push_back({*label, parse_node(false)});
    }
    if (is_keyword("WHERE")) {
      advance();
      IdFilter f;
      f.var = ident("variable").text;
      punct('.');
      const Token& key = ident("id");
      if (key.text != "id") fail({"id"});
      keyword("IN");
      punct('[');
      for (;;) {
        if (peek().kind != Tok::Int) fail({"integer"});
        const Token& t = advance();
        NodeId v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc()) throw SyntaxError(t.pos, {"integer in range"}, t.text);
        f.ids.push_back(v);
        if (at_punct(',')) {
          advance();
          continue;
        }
        if (at_punct(']')) break;
        fail({"','", "']'"});
      }
      advance();
      c.where = std::move(f);
    } else if (!is_keyword("RETURN")) {
      fail({"'-'", "WHERE", "RETURN"});
    }
    keyword("RETURN");
    for (;;) {
      Projection p;
      p.var = ident("variable").text;
      punct('.');
      p.key = ident("property").text;
      c.projections.push_back(std::move(p));
      if (!at_punct(',')) break;
      advance();
    }
    return c;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

// Variables bound by a clause, in chain order.
std::vector<const NodePattern*> chain(const Clause& c) {
  std::vector<const NodePattern*> out{&c.anchor};
  for (const auto& h : c.hops) out.push_back(&h.target);
  return out;
}

std::optional<std::size_t> position_of(const Clause& c, std::string_view var) {
  auto nodes = chain(c);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i]->var == var) return i;
  }
  return std::nullopt;
}

void validate_clause(const Clause& c) {
  auto nodes = chain(c);
  std::set<std::string> seen;
  for (const auto* n : nodes) {
    if (n->var.empty()) throw SchemaError(0, "empty variable name");
    if (!seen.insert(n->var).second) throw SchemaError(0, "variable '" + n->var + "' bound twice");
    for (const auto& [k, v] : n->props) {
      if (!has_property(n->label, k)) {
        throw SchemaError(0, "unknown property '" + k + "' on " + std::string(to_string(n->label)));
      }
    }
  }
  for (std::size_t i = 0; i < c.hops.size(); ++i) {
    const auto& h = c.hops[i];
    if (edge_source_kind(h.label) != nodes[i]->label || !edge_target_allowed(h.label, h.target.label)) {
      throw SchemaError(0, std::string(to_string(h.label)) + " cannot connect " +
                               std::string(to_string(nodes[i]->label)) + " to " +
                               std::string(to_string(h.target.label)));
    }
    if (!h.target.props.empty()) throw SchemaError(0, "hop targets take no properties");
  }
  if (c.where) {
    if (!position_of(c, c.where->var)) {
      throw SchemaError(0, "WHERE references undeclared variable '" + c.where->var + "'");
    }
    if (c.where->ids.empty()) throw SchemaError(0, "IN list must not be empty");
  }
  if (c.projections.empty()) throw SchemaError(0, "RETURN needs at least one projection");
  for (const auto& p : c.projections) {
    auto pos = position_of(c, p.var);
    if (!pos) throw SchemaError(0, "RETURN references undeclared variable '" + p.var + "'");
    if (p.key != "id" && !has_property(nodes[*pos]->label, p.key)) {
      throw SchemaError(0, "unknown property '" + p.key + "' on " +
                               std::string(to_string(nodes[*pos]->label)));
    }
  }
}

// -------------------------------------------------------------- render

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string render_node(const NodePattern& n) {
  std::string out = "(" + n.var + ":" + std::string(to_string(n.label));
  if (!n.props.empty()) {
    out += " {";
    for (std::size_t i = 0; i < n.props.size(); ++i) {
      if (i) out += ", ";
      out += n.props[i].first + ":" + quote(n.props[i].second);
    }
    out += "}";
  }
  return out + ")";
}

std::string render_clause(const Clause& c) {
  std::string out = "MATCH " + render_node(c.anchor);
  for (const auto& h : c.hops) {
    out += "-[:" + std::string(to_string(h.label)) + "]->" + render_node(h.target);
  }
  if (c.where) {
    out += " WHERE " + c.where->var + ".id IN [";
    for (std::size_t i = 0; i < c.where->ids.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(c.where->ids[i]);
    }
    out += "]";
  }
  out += " RETURN ";
  for (std::size_t i = 0; i < c.projections.size(); ++i) {
    if (i) out += ", ";
    out += c.projections[i].var + "." + c.projections[i].key;
  }
  return out;
}

// ------------------------------------------------------------- execute

std::string node_text(const Node& node, std::string_view key) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, EntityNode>) {
          return key == "type" ? std::string(to_string(n.type)) : n.name;
        } else if constexpr (std::is_same_v<T, EventNode>) {
          return key == "action" ? n.action : n.description;
        } else if constexpr (std::is_same_v<T, SceneNode>) {
          if (key == "location") return n.location;
          if (key == "time") return n.time;
          return n.context_text;
        } else {
          if (key == "key") return n.key;
          if (key == "time") return n.time;
          if (key == "location") return n.location;
          return n.description;
        }
      },
      node);
}

struct CompiledPattern {
  NodeKind label;
  std::vector<std::pair<std::string, std::string>> props;  // normalized literals

  explicit CompiledPattern(const NodePattern& p) : label(p.label) {
    for (const auto& [k, v] : p.props) props.emplace_back(k, text::normalize(v));
  }

  bool matches(const GraphStore& g, NodeId id) const {
    const Node& n = g.node(id);
    if (kind_of(n) != label) return false;
    for (const auto& [k, v] : props) {
      if (text::normalize(node_text(n, k)) != v) return false;
    }
    return true;
  }

  const std::string* prop(std::string_view key) const {
    for (const auto& [k, v] : props) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

std::vector<NodeId> seed_anchor(const CompiledPattern& p, const GraphStore& g) {
  if (p.label == NodeKind::Entity) {
    const auto* type = p.prop("type");
    const auto* name = p.prop("name");
    if (type && name) {
      auto canonical = parse_entity_type(*type);
      if (!canonical) return {};
      std::vector<NodeId> out;
      for (const auto& e : g.find_entities(*canonical, *name)) out.push_back(e.id);
      return out;
    }
  }
  std::vector<NodeId> out;
  for (NodeId id : g.ids_of_kind(p.label)) {
    if (p.matches(g, id)) out.push_back(id);
  }
  return out;
}

std::vector<Row> execute_clause(const Clause& c, const GraphStore& g) {
  std::vector<CompiledPattern> pats;
  for (const auto* n : chain(c)) pats.emplace_back(*n);
  const std::size_t len = pats.size();

  std::size_t seed_pos = 0;
  std::vector<NodeId> seeds;
  if (c.where) {
    seed_pos = *position_of(c, c.where->var);
    std::set<NodeId> ids(c.where->ids.begin(), c.where->ids.end());
    for (NodeId id : ids) {
      if (g.contains(id) && pats[seed_pos].matches(g, id)) seeds.push_back(id);
    }
  } else {
    seeds = seed_anchor(pats[0], g);
  }

  std::vector<std::vector<NodeId>> paths;
  for (NodeId s : seeds) {
    std::vector<NodeId> p(len);
    p[seed_pos] = s;
    paths.push_back(std::move(p));
  }
  for (std::size_t pos = seed_pos + 1; pos < len; ++pos) {
    std::vector<std::vector<NodeId>> next;
    for (auto& p : paths) {
      for (NodeId nb : g.neighbors(p[pos - 1], c.hops[pos - 1].label, Direction::Out)) {
        if (!pats[pos].matches(g, nb)) continue;
        auto q = p;
        q[pos] = nb;
        next.push_back(std::move(q));
      }
    }
    paths = std::move(next);
  }
  for (std::size_t pos = seed_pos; pos-- > 0;) {
    std::vector<std::vector<NodeId>> next;
    for (auto& p : paths) {
      for (NodeId nb : g.neighbors(p[pos + 1], c.hops[pos].label, Direction::In)) {
        if (!pats[pos].matches(g, nb)) continue;
        auto q = p;
        q[pos] = nb;
        next.push_back(std::move(q));
      }
    }
    paths = std::move(next);
  }

  std::vector<std::size_t> proj_pos;
  for (const auto& pr : c.projections) proj_pos.push_back(*position_of(c, pr.var));
  std::vector<Row> rows;
  rows.reserve(paths.size());
  for (const auto& p : paths) {
    Row r;
    for (std::size_t i = 0; i < c.projections.size(); ++i) {
      const NodeId id = p[proj_pos[i]];
      if (c.projections[i].key == "id") {
        r.emplace_back(id);
      } else {
        r.emplace_back(node_text(g.node(id), c.projections[i].key));
      }
    }
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

}  // namespace

std::span<const std::string_view> properties_of(NodeKind label) {
  switch (label) {
    case NodeKind::Entity: return kEntityProps;
    case NodeKind::Event: return kEventProps;
    case NodeKind::Scene: return kSceneProps;
    case NodeKind::Context: return kContextProps;
  }
  return {};
}

void validate(const QueryPlan& plan) {
  if (plan.clauses.empty()) throw SchemaError(0, "query has no clauses");
  for (const auto& c : plan.clauses) validate_clause(c);
  const auto width = plan.clauses.front().projections.size();
  for (const auto& c : plan.clauses) {
    if (c.projections.size() != width) {
      throw SchemaError(0, "combined clauses must return the same number of columns");
    }
  }
}

QueryPlan parse(std::string_view text) {
  QueryPlan plan = Parser(text).parse_query();
  validate(plan);
  return plan;
}

std::string render(const QueryPlan& plan) {
  std::string out;
  const std::string_view sep = plan.combinator == Combinator::Union ? " UNION " : " INTERSECT ";
  for (std::size_t i = 0; i < plan.clauses.size(); ++i) {
    if (i) out += sep;
    out += render_clause(plan.clauses[i]);
  }
  return out;
}

ResultTable execute(const QueryPlan& plan, const GraphStore& graph) {
  validate(plan);
  ResultTable table;
  for (const auto& p : plan.clauses.front().projections) table.columns.push_back(p.var + "." + p.key);

  std::vector<Row> acc = execute_clause(plan.clauses.front(), graph);
  for (std::size_t i = 1; i < plan.clauses.size(); ++i) {
    std::vector<Row> next = execute_clause(plan.clauses[i], graph);
    std::vector<Row> merged;
    if (plan.combinator == Combinator::Union) {
      std::set_union(acc.begin(), acc.end(), next.begin(), next.end(), std::back_inserter(merged));
    } else {
      std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(),
                            std::back_inserter(merged));
    }
    acc = std::move(merged);
  }
  table.rows = std::move(acc);
  return table;
}

// ------------------------------------------------------------ builders

namespace {

std::vector<NodeId> canonical_ids(std::span<const NodeId> ids) {
  std::vector<NodeId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Clause context_clause(std::string var, NodeKind target, std::span<const NodeId> ids) {
  Clause c;
  c.anchor = {"c", NodeKind::Context, {}};
  c.hops.push_back({EdgeLabel::ContextOf, {var, target, {}}});
  c.where = IdFilter{var, canonical_ids(ids)};
  c.projections = {{"c", "id"}};
  return c;
}

}  // namespace

std::string build_entity_query(std::span<const EntityRef> entities) {
  if (entities.empty()) throw std::invalid_argument("entity query needs at least one entity");
  QueryPlan plan;
  for (const auto& e : entities) {
    Clause c;
    c.anchor = {"e", NodeKind::Entity, {{"type", std::string(to_string(e.type))}, {"name", e.name}}};
    c.projections = {{"e", "id"}, {"e", "type"}, {"e", "name"}};
    plan.clauses.push_back(std::move(c));
  }
  return render(plan);
}

EventSceneQueries build_event_scene_query(std::span<const NodeId> entity_ids) {
  if (entity_ids.empty()) throw std::invalid_argument("event/scene query needs entity ids");
  const auto ids = canonical_ids(entity_ids);

  Clause events;
  events.anchor = {"e", NodeKind::Entity, {}};
  events.hops.push_back({EdgeLabel::ParticipatesIn, {"v", NodeKind::Event, {}}});
  events.where = IdFilter{"e", ids};
  events.projections = {{"v", "id"}, {"v", "action"}, {"v", "description"}};

  Clause scenes = events;
  scenes.hops.push_back({EdgeLabel::PartOf, {"s", NodeKind::Scene, {}}});
  scenes.projections = {{"s", "id"}, {"s", "context_text"}, {"s", "location"}, {"s", "time"}};

  return {render(QueryPlan{{std::move(events)}, Combinator::Union}),
          render(QueryPlan{{std::move(scenes)}, Combinator::Union})};
}

std::string build_context_query(std::span<const NodeId> entity_ids,
                                std::span<const NodeId> event_ids,
                                std::span<const NodeId> scene_ids) {
  QueryPlan plan;
  plan.combinator = Combinator::Intersect;
  if (!entity_ids.empty()) plan.clauses.push_back(context_clause("e", NodeKind::Entity, entity_ids));
  if (!event_ids.empty()) plan.clauses.push_back(context_clause("v", NodeKind::Event, event_ids));
  if (!scene_ids.empty()) plan.clauses.push_back(context_clause("s", NodeKind::Scene, scene_ids));
  if (plan.clauses.empty()) throw std::invalid_argument("context query needs at least one id list");
  // A lone clause parses back as UNION; keep the plan canonical.
  if (plan.clauses.size() == 1) plan.combinator = Combinator::Union;
  return render(plan);
}

}  // namespace ees::query
