#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ees/pipeline.hpp"
#include "ees/record.hpp"
#include "oracles.hpp"

using namespace ees;

namespace {

EESRecord katerine(const std::string& id, const std::string& ctx, const std::string& scene) {
  EESRecord r;
  r.record_id = id;
  r.entities = {{"Philippe Katerine", "Person"}, {"Paris", "Location"}};
  r.events = {{{"Philippe Katerine"}, "", "Philippe Katerine performs on a stage"}};
  r.scene = {scene, "Paris", "2024-07-26"};
  r.context = RecordContext{ctx, "opening ceremony", "", ""};
  return r;
}

std::vector<std::string> rules(const std::vector<Violation>& vs) {
  std::vector<std::string> out;
  for (const auto& v : vs) out.push_back(v.rule);
  return out;
}

}  // namespace

TEST(Record, MinimalRecordParses) {
  const auto r = parse_record(
      R"({"record_id":"m","entities":[{"name":"Ada","type":"Person"}],"events":[],)"
      R"("scene":{"description":"a room"}})");
  EXPECT_EQ(r.entities.size(), 1u);
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(r.scene.description, "a room");
  EXPECT_FALSE(r.context);
}

TEST(Record, ContextBlockPopulated) {
  const auto r = parse_record(
      R"({"record_id":"m","entities":[{"name":"Ada","type":"Person"}],"events":[],)"
      R"("scene":{"description":"a room"},)"
      R"("context":{"context_id":"c9","description":"talk","time":"2024","location":"Rome"}})");
  ASSERT_TRUE(r.context);
  EXPECT_EQ(*r.context, (RecordContext{"c9", "talk", "2024", "Rome"}));
}

TEST(Record, UnknownParticipantNamesEventIndex) {
  try {
    parse_record(
        R"({"record_id":"m","entities":[{"name":"Ada","type":"Person"}],)"
        R"("events":[{"entity_names":["Ada"],"description":"ok"},)"
        R"({"entity_names":["Bob"],"description":"who"}],"scene":{"description":"a room"}})");
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.path(), "events[1].entity_names[0]");
    EXPECT_EQ(e.rule(), "unknown_participant");
  }
}

TEST(Record, SchemaViolationsRejected) {
  EXPECT_THROW(parse_record("{"), RecordError);
  EXPECT_THROW(parse_record(R"({"record_id":"m","entities":[],"events":[],"scene":{"description":"x"},"extra":1})"),
               RecordError);
  EXPECT_THROW(parse_record(R"({"record_id":"m","entities":[{"name":1,"type":"Person"}],"events":[],"scene":{"description":"x"}})"),
               RecordError);
}

TEST(Record, Validation) {
  EESRecord ok = katerine("a", "c", "stage");
  EXPECT_TRUE(validate_record(ok).empty());

  EESRecord empty = ok;
  empty.entities.clear();
  empty.events.clear();
  const auto v = validate_record(empty);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "entities");
  EXPECT_EQ(v[0].severity, Severity::Error);

  EESRecord dup = ok;
  dup.entities.push_back({"Philippe Katerine", "Person"});
  const auto w = validate_record(dup);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].rule, "duplicate_entity");
  EXPECT_EQ(w[0].severity, Severity::Warning);

  EESRecord blank = ok;
  blank.scene.description = " ";
  blank.events[0].description = "";
  EXPECT_EQ(rules(validate_record(blank)),
            (std::vector<std::string>{"description_nonempty", "scene_nonempty"}));
}

TEST(Record, SerializeRoundTrip) {
  const EESRecord r = katerine("a", "c", "stage\twith \"quotes\" 舞台");
  const std::string line = serialize_record(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_record(line), r);
}

TEST(Ingest, SharedEntityAcrossContexts) {
  const std::vector<EESRecord> corpus = {katerine("a", "ctx-1", "a stage"),
                                         katerine("b", "ctx-2", "a studio")};
  const TypeNormalizer types;
  const auto result = build_graph(corpus, types);
  const auto& g = result.graph;
  const auto found = g.find_entities(EntityType::Person, "Philippe Katerine");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(g.neighbors(found[0].id, EdgeLabel::ContextOf, Direction::In).size(), 2u);
  EXPECT_EQ(result.report.accepted, 2u);
}

TEST(Ingest, SingleRecordSatisfiesContextInvariant) {
  const std::vector<EESRecord> corpus = {katerine("a", "ctx-1", "a stage")};
  const TypeNormalizer types;
  const auto result = build_graph(corpus, types);
  EXPECT_TRUE(result.graph.check_invariants().empty());
  const NodeId c = *result.graph.find_context("ctx-1");
  std::set<NodeKind> kinds;
  for (NodeId x : result.graph.neighbors(c, EdgeLabel::ContextOf, Direction::Out)) {
    kinds.insert(result.graph.kind(x));
  }
  EXPECT_EQ(kinds, (std::set<NodeKind>{NodeKind::Entity, NodeKind::Event, NodeKind::Scene}));
}

TEST(Ingest, RejectionsAreTallied) {
  std::stringstream in;
  EESRecord no_ctx = katerine("n", "x", "s");
  no_ctx.context.reset();
  EESRecord no_events = katerine("e", "y", "s");
  no_events.events.clear();
  in << serialize_record(katerine("a", "ctx-1", "s")) << "\n"
     << "\n"
     << "{not json\n"
     << serialize_record(no_ctx) << "\n"
     << serialize_record(no_events) << "\n";
  const TypeNormalizer types;
  const auto result = build_graph(in, types);
  EXPECT_EQ(result.report.read, 4u);
  EXPECT_EQ(result.report.accepted, 1u);
  EXPECT_EQ(result.report.rejected, 3u);
  ASSERT_EQ(result.report.rejections.size(), 3u);
  EXPECT_EQ(result.report.rejections[0].line, 3u);
  EXPECT_EQ(result.report.rejections[1].rule, "missing_context");
  EXPECT_EQ(result.report.rejections[2].rule, "context_without_event");
}

TEST(Ingest, CountsMatchIndependentOracle) {
  oracle::Rng rng(61);
  auto corpus = oracle::random_corpus(rng, 100);
  for (auto& r : corpus) r.context->context_id = "c" + std::to_string(oracle::pick(rng, 60));

  const std::map<std::string, std::string> canon = {
      {"Person", "Person"},     {"Organization", "Organization"}, {"Location", "Location"},
      {"Object", "Object"},     {"Company", "Organization"},      {"Place", "Location"},
      {"Item", "Object"}};
  std::set<std::pair<std::string, std::string>> entities;
  std::set<std::string> contexts;
  std::set<std::tuple<std::string, std::string, std::string>> context_entity;
  std::size_t events = 0, scenes = 0, participations = 0, context_other = 0;
  for (const auto& r : corpus) {
    contexts.insert(r.context->context_id);
    for (const auto& e : r.entities) {
      entities.insert({canon.at(e.type), e.name});
      context_entity.insert({r.context->context_id, canon.at(e.type), e.name});
    }
    for (const auto& ev : r.events) {
      ++events;
      std::set<std::pair<std::string, std::string>> who;
      for (const auto& n : ev.entity_names) {
        for (const auto& e : r.entities) {
          if (e.name == n) who.insert({canon.at(e.type), e.name});
        }
      }
      participations += who.size();
    }
    ++scenes;
    context_other += r.events.size() + 1;
  }
  const std::size_t expect_nodes = entities.size() + events + scenes + contexts.size();
  const std::size_t expect_edges = participations + events + context_entity.size() + context_other;

  const TypeNormalizer types;
  const auto result = build_graph(corpus, types);
  EXPECT_EQ(result.report.accepted, 100u);
  EXPECT_EQ(result.report.nodes, expect_nodes);
  EXPECT_EQ(result.report.edges, expect_edges);
  EXPECT_EQ(result.graph.ids_of_kind(NodeKind::Entity).size(), entities.size());
  EXPECT_EQ(result.graph.ids_of_kind(NodeKind::Context).size(), contexts.size());
}

TEST(Ingest, ReadRecordsCitesLine) {
  const auto path = std::filesystem::temp_directory_path() / "ees_test_records.jsonl";
  {
    std::ofstream out(path);
    out << serialize_record(katerine("a", "c", "s")) << "\n{broken\n";
  }
  try {
    read_records(path);
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}
