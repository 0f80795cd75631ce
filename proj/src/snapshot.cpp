// Line-oriented text snapshot of a GraphStore.
//
//   EESKG v1 <dim>
//   N <id> <kind> key=value ...      (tab separated, nodes sorted by id)
//   E <src> <dst> <label>            (edges sorted by (src, dst, label))
//
// Values escape tab, newline and backslash; keys appear in a fixed order
// per kind, so saving the same graph always yields the same bytes.

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ees/graph_store.hpp"
#include "ees/text.hpp"

namespace ees {

namespace {

constexpr std::string_view kMagic = "EESKG";
constexpr std::string_view kVersion = "v1";

std::string_view kind_tag(NodeKind kind) {
  switch (kind) {
    case NodeKind::Entity: return "ENT";
    case NodeKind::Event: return "EVT";
    case NodeKind::Scene: return "SCN";
    case NodeKind::Context: return "CTX";
  }
  return "?";
}

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

void field(std::ostream& out, std::string_view key, std::string_view value) {
  out << '\t' << key << '=' << text::escape(value);
}

struct NodeWriter {
  std::ostream& out;
  void operator()(const EntityNode& e) const {
    field(out, "type", to_string(e.type));
    field(out, "name", e.name);
  }
  void operator()(const EventNode& ev) const {
    field(out, "entities", join_ids(ev.entity_ids));
    field(out, "action", ev.action);
    field(out, "description", ev.description);
  }
  void operator()(const SceneNode& sc) const {
    field(out, "events", join_ids(sc.event_ids));
    field(out, "location", sc.location);
    field(out, "time", sc.time);
    field(out, "context", sc.context_text);
  }
  void operator()(const ContextNode& c) const {
    field(out, "key", c.key);
    field(out, "description", c.description);
    field(out, "time", c.time);
    field(out, "location", c.location);
  }
};

std::uint64_t parse_uint(std::string_view s, std::size_t line, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw SnapshotError(line, "malformed " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<NodeId> parse_ids(std::string_view s, std::size_t line) {
  std::vector<NodeId> out;
  if (s.empty()) return out;
  for (auto part : text::split(s, ',')) out.push_back(parse_uint(part, line, "id list"));
  return out;
}

// Reads `key=value` columns in the exact order `keys`.
std::vector<std::string> read_fields(const std::vector<std::string_view>& cols,
                                     std::initializer_list<std::string_view> keys,
                                     std::size_t line) {
  if (cols.size() != 3 + keys.size()) {
    throw SnapshotError(line, "expected " + std::to_string(keys.size()) + " fields, got " +
                                  std::to_string(cols.size() - 3));
  }
  std::vector<std::string> values;
  std::size_t i = 3;
  for (auto key : keys) {
    auto col = cols[i++];
    auto eq = col.find('=');
    if (eq == std::string_view::npos || col.substr(0, eq) != key) {
      throw SnapshotError(line, "expected field '" + std::string(key) + "'");
    }
    try {
      values.push_back(text::unescape(col.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw SnapshotError(line, e.what());
    }
  }
  return values;
}

Node parse_node(const std::vector<std::string_view>& cols, std::size_t line) {
  const auto tag = cols[2];
  if (tag == "ENT") {
    auto f = read_fields(cols, {"type", "name"}, line);
    auto type = parse_entity_type(f[0]);
    if (!type) throw SnapshotError(line, "unknown entity type '" + f[0] + "'");
    return EntityNode{0, *type, std::move(f[1])};
  }
  if (tag == "EVT") {
    auto f = read_fields(cols, {"entities", "action", "description"}, line);
    return EventNode{0, parse_ids(f[0], line), std::move(f[1]), std::move(f[2])};
  }
  if (tag == "SCN") {
    auto f = read_fields(cols, {"events", "location", "time", "context"}, line);
    return SceneNode{0, parse_ids(f[0], line), std::move(f[1]), std::move(f[2]), std::move(f[3])};
  }
  if (tag == "CTX") {
    auto f = read_fields(cols, {"key", "description", "time", "location"}, line);
    return ContextNode{0, std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3])};
  }
  throw SnapshotError(line, "unknown node kind '" + std::string(tag) + "'");
}

}  // namespace

void GraphStore::write_snapshot(std::ostream& out) const {
  out << kMagic << ' ' << kVersion << ' ' << embedding_dim_ << '\n';
  for (const auto& n : nodes_) {
    out << "N\t" << id_of(n) << '\t' << kind_tag(kind_of(n));
    std::visit(NodeWriter{out}, n);
    out << '\n';
  }
  for (const auto& e : edges()) {
    out << "E\t" << e.src << '\t' << e.dst << '\t' << to_string(e.label) << '\n';
  }
}

void GraphStore::save_snapshot(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GraphError("cannot open " + path.string() + " for writing");
  write_snapshot(out);
  out.flush();
  if (!out) throw GraphError("failed writing " + path.string());
}

GraphStore GraphStore::read_snapshot(std::istream& in) {
  GraphStore g;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw SnapshotError(1, "missing header");
  {
    auto parts = text::split(line, ' ');
    if (parts.size() != 3 || parts[0] != kMagic || parts[1] != kVersion) {
      throw SnapshotError(1, "bad header '" + line + "'");
    }
    g.embedding_dim_ = parse_uint(parts[2], 1, "dimension");
  }

  bool in_edges = false;
  auto check_refs = [&g](std::size_t at) {
    try {
      g.check_member_refs();
    } catch (const GraphError& e) {
      throw SnapshotError(at, e.what());
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols[0] == "N") {
      if (in_edges) throw SnapshotError(lineno, "node record after edge records");
      if (cols.size() < 3) throw SnapshotError(lineno, "truncated node record");
      const NodeId id = parse_uint(cols[1], lineno, "node id");
      if (id != g.nodes_.size()) {
        throw SnapshotError(lineno, "node ids must be dense and ascending; expected " +
                                        std::to_string(g.nodes_.size()));
      }
      try {
        g.insert(parse_node(cols, lineno), false, false);
      } catch (const SnapshotError&) {
        throw;
      } catch (const GraphError& e) {
        throw SnapshotError(lineno, e.what());
      }
    } else if (cols[0] == "E") {
      if (!in_edges) check_refs(lineno);
      in_edges = true;
      if (cols.size() != 4) throw SnapshotError(lineno, "edge record needs 4 columns");
      auto label = parse_edge_label(cols[3]);
      if (!label) throw SnapshotError(lineno, "unknown edge label '" + std::string(cols[3]) + "'");
      try {
        g.add_edge(parse_uint(cols[1], lineno, "edge source"),
                   parse_uint(cols[2], lineno, "edge target"), *label);
      } catch (const SnapshotError&) {
        throw;
      } catch (const GraphError& e) {
        throw SnapshotError(lineno, e.what());
      }
    } else {
      throw SnapshotError(lineno, "unknown record type '" + std::string(cols[0]) + "'");
    }
  }
  if (!in_edges) check_refs(lineno);
  if (auto bad = g.membership_violations(); !bad.empty()) {
    throw SnapshotError(lineno, bad.front());
  }
  return g;
}

GraphStore GraphStore::load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace ees
