#pragma once
// EESRecord: one extractor output (or query) as a single JSON line.
//
// {"record_id": "...",
//  "entities": [{"name": "...", "type": "..."}],
//  "events":   [{"entity_names": ["..."], "action": "...", "description": "..."}],
//  "scene":    {"description": "...", "location": "...", "time": "..."},
//  "context":  {"context_id": "...", "description": "...", "time": "...", "location": "..."}}
//
// `action`, `location`, `time` and the whole `context` block are optional.
// Unknown keys are rejected.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ees/graph_store.hpp"

namespace ees {

class TypeNormalizer;

struct RecordEntity {
  std::string name;
  std::string type;  // raw, as emitted upstream
  bool operator==(const RecordEntity&) const = default;
};

struct RecordEvent {
  std::vector<std::string> entity_names;
  std::string action;
  std::string description;
  bool operator==(const RecordEvent&) const = default;
};

struct RecordScene {
  std::string description;
  std::string location;
  std::string time;
  bool operator==(const RecordScene&) const = default;
};

struct RecordContext {
  std::string context_id;
  std::string description;
  std::string time;
  std::string location;
  bool operator==(const RecordContext&) const = default;
};

struct EESRecord {
  std::string record_id;
  std::vector<RecordEntity> entities;
  std::vector<RecordEvent> events;
  RecordScene scene;
  std::optional<RecordContext> context;
  bool operator==(const EESRecord&) const = default;
};

enum class Severity { Error, Warning };

struct Violation {
  std::string path;  // e.g. "events[1].entity_names[0]"
  std::string rule;
  Severity severity = Severity::Error;
  std::string message;
};

class RecordError : public std::runtime_error {
 public:
  RecordError(std::string path, std::string rule, const std::string& message);
  const std::string& path() const { return path_; }
  const std::string& rule() const { return rule_; }

 private:
  std::string path_;
  std::string rule_;
};

std::vector<Violation> validate_record(const EESRecord& record);

// Strict parse followed by validation; the first error-level violation is
// thrown as a RecordError.
EESRecord parse_record(std::string_view document);
// Schema only, no invariant checks.
EESRecord parse_record_unchecked(std::string_view document);

// One-line JSON, keys in schema order. Optional empty fields are omitted.
std::string serialize_record(const EESRecord& record);

struct Rejection {
  std::size_t line = 0;  // 1-based line in the input, 0 when not from a stream
  std::string record_id;
  std::string rule;
  std::string message;
};

struct CorpusReport {
  std::size_t read = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> rejections_by_rule;
  std::vector<Rejection> rejections;
  std::size_t warnings = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

struct BuildResult {
  GraphStore graph;
  CorpusReport report;
};

// Incremental corpus -> graph construction.
class GraphBuilder {
 public:
  explicit GraphBuilder(const TypeNormalizer& types);

  // Returns false (and tallies the rejection) when the record is skipped.
  bool add(const EESRecord& record, std::size_t line = 0);
  // Parses one JSONL line and adds it; malformed lines are tallied.
  bool add_line(std::string_view line, std::size_t lineno);

  BuildResult finish() &&;

 private:
  void reject(std::size_t line, std::string record_id, std::string rule, std::string message);

  const TypeNormalizer& types_;
  GraphStore graph_;
  CorpusReport report_;
};

BuildResult build_graph(std::span<const EESRecord> records, const TypeNormalizer& types);
// Throws std::runtime_error if the stream goes bad mid-read.
BuildResult build_graph(std::istream& jsonl, const TypeNormalizer& types);

// Reads every non-blank line of a JSONL file. Errors cite file and line.
std::vector<EESRecord> read_records(const std::filesystem::path& path);

}  // namespace ees
