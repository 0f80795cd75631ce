#include "ees/record.hpp"

#include <fstream>
#include <istream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "ees/pipeline.hpp"
#include "ees/text.hpp"

namespace ees {

using nlohmann::json;
using nlohmann::ordered_json;

RecordError::RecordError(std::string path, std::string rule, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message),
      path_(std::move(path)),
      rule_(std::move(rule)) {}

namespace {

std::string at(std::string_view base, std::string_view key) {
  return base.empty() ? std::string(key) : std::string(base) + "." + std::string(key);
}

std::string at(std::string_view base, std::size_t index) {
  return std::string(base) + "[" + std::to_string(index) + "]";
}

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw RecordError(path, "schema", message);
}

void expect_object(const json& v, const std::string& path,
                   std::initializer_list<std::string_view> required,
                   std::initializer_list<std::string_view> optional) {
  if (!v.is_object()) schema_error(path.empty() ? "$" : path, "expected an object");
  for (auto key : required) {
    if (!v.contains(std::string(key))) schema_error(at(path, key), "missing required field");
  }
  for (const auto& [key, _] : v.items()) {
    bool known = false;
    for (auto k : required) known = known || k == key;
    for (auto k : optional) known = known || k == key;
    if (!known) schema_error(at(path, key), "unknown field");
  }
}

std::string string_field(const json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) return {};
  if (!it->is_string()) schema_error(at(path, key), "expected a string");
  return it->get<std::string>();
}

const json& array_field(const json& obj, std::string_view key, const std::string& path) {
  const json& v = obj.at(std::string(key));
  if (!v.is_array()) schema_error(at(path, key), "expected an array");
  return v;
}

bool blank(std::string_view s) { return text::trim(s).empty(); }

}  // namespace

EESRecord parse_record_unchecked(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw RecordError("", "malformed", std::string("malformed JSON: ") + e.what());
  }

  EESRecord r;
  expect_object(doc, "", {"record_id", "entities", "events", "scene"}, {"context"});
  r.record_id = string_field(doc, "record_id", "");

  const json& entities = array_field(doc, "entities", "");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto path = at("entities", i);
    expect_object(entities[i], path, {"name", "type"}, {});
    r.entities.push_back({string_field(entities[i], "name", path),
                          string_field(entities[i], "type", path)});
  }

  const json& events = array_field(doc, "events", "");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto path = at("events", i);
    expect_object(events[i], path, {"entity_names", "description"}, {"action"});
    RecordEvent ev;
    const json& names = array_field(events[i], "entity_names", path);
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (!names[j].is_string()) schema_error(at(at(path, "entity_names"), j), "expected a string");
      ev.entity_names.push_back(names[j].get<std::string>());
    }
    ev.action = string_field(events[i], "action", path);
    ev.description = string_field(events[i], "description", path);
    r.events.push_back(std::move(ev));
  }

  expect_object(doc["scene"], "scene", {"description"}, {"location", "time"});
  r.scene.description = string_field(doc["scene"], "description", "scene");
  r.scene.location = string_field(doc["scene"], "location", "scene");
  r.scene.time = string_field(doc["scene"], "time", "scene");

  if (doc.contains("context")) {
    const json& c = doc["context"];
    expect_object(c, "context", {"context_id", "description"}, {"time", "location"});
    r.context = RecordContext{string_field(c, "context_id", "context"),
                              string_field(c, "description", "context"),
                              string_field(c, "time", "context"),
                              string_field(c, "location", "context")};
  }
  return r;
}

std::vector<Violation> validate_record(const EESRecord& r) {
  std::vector<Violation> out;
  auto error = [&](std::string path, std::string rule, std::string msg) {
    out.push_back({std::move(path), std::move(rule), Severity::Error, std::move(msg)});
  };

  if (r.entities.empty()) error("entities", "entities_nonempty", "record has no entities");

  std::set<std::string> names;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < r.entities.size(); ++i) {
    const auto& e = r.entities[i];
    if (blank(e.name)) {
      error(at(at("entities", i), "name"), "name_nonempty", "entity name is empty");
      continue;
    }
    auto name = text::normalize(e.name);
    names.insert(name);
    if (!seen.emplace(name, std::string(text::trim(e.type))).second) {
      out.push_back({at("entities", i), "duplicate_entity", Severity::Warning,
                     "entity (" + name + ", " + e.type + ") listed twice"});
    }
  }

  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const auto& ev = r.events[i];
    const auto path = at("events", i);
    if (blank(ev.description)) {
      error(at(path, "description"), "description_nonempty", "event " + std::to_string(i) +
                                                                 " has an empty description");
    }
    if (ev.entity_names.empty()) {
      error(at(path, "entity_names"), "participants_nonempty",
            "event " + std::to_string(i) + " names no entities");
    }
    for (std::size_t j = 0; j < ev.entity_names.size(); ++j) {
      if (!names.contains(text::normalize(ev.entity_names[j]))) {
        error(at(at(path, "entity_names"), j), "unknown_participant",
              "event " + std::to_string(i) + " names '" + ev.entity_names[j] +
                  "', which is not among the record's entities");
      }
    }
  }

  if (blank(r.scene.description)) {
    error("scene.description", "scene_nonempty", "scene description is empty");
  }
  if (r.context) {
    if (blank(r.context->context_id)) {
      error("context.context_id", "context_id_nonempty", "context block without context_id");
    }
    if (blank(r.context->description)) {
      error("context.description", "context_description_nonempty", "context description is empty");
    }
  }
  return out;
}

EESRecord parse_record(std::string_view document) {
  EESRecord r = parse_record_unchecked(document);
  for (const auto& v : validate_record(r)) {
    if (v.severity == Severity::Error) throw RecordError(v.path, v.rule, v.message);
  }
  return r;
}

std::string serialize_record(const EESRecord& r) {
  ordered_json doc;
  doc["record_id"] = r.record_id;
  doc["entities"] = ordered_json::array();
  for (const auto& e : r.entities) doc["entities"].push_back({{"name", e.name}, {"type", e.type}});
  doc["events"] = ordered_json::array();
  for (const auto& ev : r.events) {
    ordered_json j;
    j["entity_names"] = ev.entity_names;
    if (!ev.action.empty()) j["action"] = ev.action;
    j["description"] = ev.description;
    doc["events"].push_back(std::move(j));
  }
  ordered_json scene;
  scene["description"] = r.scene.description;
  if (!r.scene.location.empty()) scene["location"] = r.scene.location;
  if (!r.scene.time.empty()) scene["time"] = r.scene.time;
  doc["scene"] = std::move(scene);
  if (r.context) {
    ordered_json c;
    c["context_id"] = r.context->context_id;
    c["description"] = r.context->description;
    if (!r.context->time.empty()) c["time"] = r.context->time;
    if (!r.context->location.empty()) c["location"] = r.context->location;
    doc["context"] = std::move(c);
  }
  return doc.dump();
}

// ------------------------------------------------------------- builder

GraphBuilder::GraphBuilder(const TypeNormalizer& types) : types_(types) {}

void GraphBuilder::reject(std::size_t line, std::string record_id, std::string rule,
                          std::string message) {
  ++report_.rejected;
  ++report_.rejections_by_rule[rule];
  report_.rejections.push_back({line, std::move(record_id), std::move(rule), std::move(message)});
}

bool GraphBuilder::add(const EESRecord& r, std::size_t line) {
  ++report_.read;
  for (const auto& v : validate_record(r)) {
    if (v.severity == Severity::Error) {
      reject(line, r.record_id, v.rule, v.path + ": " + v.message);
      return false;
    }
    ++report_.warnings;
  }
  if (!r.context) {
    reject(line, r.record_id, "missing_context", "corpus records need a context block");
    return false;
  }
  if (r.events.empty()) {
    reject(line, r.record_id, "context_without_event",
           "a context must link an event, but the record has none");
    return false;
  }

  std::vector<NodeId> entity_ids;
  std::unordered_map<std::string, std::vector<NodeId>> by_name;
  for (const auto& e : r.entities) {
    const NodeId id = graph_.upsert_node(EntityNode{0, types_.normalize(e.type), e.name});
    if (std::find(entity_ids.begin(), entity_ids.end(), id) == entity_ids.end()) {
      entity_ids.push_back(id);
      by_name[text::normalize(e.name)].push_back(id);
    }
  }

  std::vector<NodeId> event_ids;
  for (const auto& ev : r.events) {
    std::vector<NodeId> participants;
    for (const auto& name : ev.entity_names) {
      const auto& ids = by_name.at(text::normalize(name));
      participants.insert(participants.end(), ids.begin(), ids.end());
    }
    event_ids.push_back(
        graph_.upsert_node(EventNode{0, std::move(participants), ev.action, ev.description}));
  }

  const NodeId scene_id = graph_.upsert_node(
      SceneNode{0, event_ids, r.scene.location, r.scene.time, r.scene.description});

  NodeId context_id;
  if (auto existing = graph_.find_context(r.context->context_id)) {
    context_id = *existing;
  } else {
    context_id = graph_.upsert_node(ContextNode{0, r.context->context_id, r.context->description,
                                                r.context->time, r.context->location});
  }
  for (NodeId id : entity_ids) graph_.add_edge(context_id, id, EdgeLabel::ContextOf);
  for (NodeId id : event_ids) graph_.add_edge(context_id, id, EdgeLabel::ContextOf);
  graph_.add_edge(context_id, scene_id, EdgeLabel::ContextOf);

  ++report_.accepted;
  return true;
}

bool GraphBuilder::add_line(std::string_view line, std::size_t lineno) {
  EESRecord r;
  try {
    r = parse_record_unchecked(line);
  } catch (const RecordError& e) {
    ++report_.read;
    reject(lineno, "", e.rule(), e.what());
    return false;
  }
  return add(r, lineno);
}

BuildResult GraphBuilder::finish() && {
  if (auto bad = graph_.check_invariants(); !bad.empty()) {
    throw std::logic_error("built graph violates invariants: " + bad.front());
  }
  report_.nodes = graph_.node_count();
  report_.edges = graph_.edge_count();
  return {std::move(graph_), std::move(report_)};
}

BuildResult build_graph(std::span<const EESRecord> records, const TypeNormalizer& types) {
  GraphBuilder b(types);
  for (const auto& r : records) b.add(r);
  return std::move(b).finish();
}

BuildResult build_graph(std::istream& in, const TypeNormalizer& types) {
  GraphBuilder b(types);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    b.add_line(line, lineno);
  }
  if (in.bad()) throw std::runtime_error("error reading corpus stream");
  return std::move(b).finish();
}

std::vector<EESRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<EESRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const RecordError& e) {
      throw RecordError(path.string() + ":" + std::to_string(lineno), e.rule(), e.what());
    }
  }
  return out;
}

}  // namespace ees
