#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ees/pipeline.hpp"
#include "ees/record.hpp"

namespace ees {

struct LabeledQuery {
  EESRecord record;
  std::string gold_context_id;
};

// Query files are record lines with an extra top-level "gold_context_id".
// Without it, a record's own context block supplies the gold id. Errors
// cite file and line.
std::vector<LabeledQuery> read_labeled_queries(const std::filesystem::path& path,
                                               bool require_gold = true);
std::string serialize_labeled_query(const LabeledQuery& query);

// 1 iff gold is among the first k ranked ids.
int hit_at_k(std::span<const NodeId> ranked, NodeId gold, std::size_t k);

struct QueryRow {
  std::string query_id;
  std::size_t candidate_count = 0;
  bool gold_in_candidates = false;
  std::optional<std::size_t> gold_rank;  // 1-based
  std::string error;
};

struct MetricsReport {
  std::size_t n_queries = 0;
  double match_rate = 0.0;
  double hit_at_1 = 0.0;
  double hit_at_2 = 0.0;
  std::vector<QueryRow> rows;  // sorted by query id
};

// Recomputes the rates from per-query rows.
MetricsReport summarize(std::vector<QueryRow> rows);

// Runs the pipeline for every query on up to `jobs` threads; the report does
// not depend on `jobs`.
MetricsReport evaluate(std::span<const LabeledQuery> queries, const GraphStore& graph,
                       const MatchConfig& config, const Providers& providers,
                       const TypeNormalizer& types, int jobs = 1);
// Single-threaded reference.
MetricsReport evaluate_serial(std::span<const LabeledQuery> queries, const GraphStore& graph,
                              const MatchConfig& config, const Providers& providers,
                              const TypeNormalizer& types);

struct AblationRow {
  MatchMode mode;
  SimilarityMode similarity;
  MetricsReport metrics;
  std::size_t event_embedding_calls = 0;
};

// ES/semantic, then EE and EES each with semantic, action, semantic+action.
// Weights and k come from base_config.
std::vector<AblationRow> run_ablation(std::span<const LabeledQuery> queries,
                                      const GraphStore& graph, const MatchConfig& base_config,
                                      const Providers& providers, const TypeNormalizer& types,
                                      int jobs = 1);

void write_report(std::ostream& out, const MetricsReport& report, bool with_rows);
void write_ablation(std::ostream& out, std::span<const AblationRow> rows);

struct Fixture {
  std::vector<EESRecord> corpus;
  std::vector<LabeledQuery> queries;  // "q-v-*" verbatim, "q-p-*" perturbed
  std::vector<std::string> action_lexicon;
};

// Synthetic corpus with planted golds. Same seed, same bytes.
Fixture generate_fixture(std::size_t n_contexts, std::uint64_t seed);

}  // namespace ees
