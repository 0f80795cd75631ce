#include "ees/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "ees/text.hpp"

namespace ees {

using nlohmann::ordered_json;

std::vector<LabeledQuery> read_labeled_queries(const std::filesystem::path& path,
                                               bool require_gold) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<LabeledQuery> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    ordered_json doc;
    try {
      doc = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw RecordError(where, "malformed", std::string("malformed JSON: ") + e.what());
    }
    LabeledQuery q;
    if (doc.is_object() && doc.contains("gold_context_id")) {
      if (!doc["gold_context_id"].is_string()) {
        throw RecordError(where + ": gold_context_id", "schema", "expected a string");
      }
      q.gold_context_id = doc["gold_context_id"].get<std::string>();
      doc.erase("gold_context_id");
    }
    try {
      q.record = parse_record(doc.dump());
    } catch (const RecordError& e) {
      throw RecordError(where, e.rule(), e.what());
    }
    if (q.gold_context_id.empty() && q.record.context) {
      q.gold_context_id = q.record.context->context_id;
    }
    if (require_gold && q.gold_context_id.empty()) {
      throw RecordError(where, "missing_gold", "query has no gold_context_id");
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::string serialize_labeled_query(const LabeledQuery& q) {
  auto doc = ordered_json::parse(serialize_record(q.record));
  if (!q.gold_context_id.empty()) doc["gold_context_id"] = q.gold_context_id;
  return doc.dump();
}

int hit_at_k(std::span<const NodeId> ranked, NodeId gold, std::size_t k) {
  if (k == 0) throw std::invalid_argument("hit_at_k: k must be at least 1");
  const auto n = std::min(k, ranked.size());
  return std::find(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), gold) !=
                 ranked.begin() + static_cast<std::ptrdiff_t>(n)
             ? 1
             : 0;
}

MetricsReport summarize(std::vector<QueryRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const QueryRow& a, const QueryRow& b) { return a.query_id < b.query_id; });
  MetricsReport r;
  r.n_queries = rows.size();
  std::size_t match = 0, h1 = 0, h2 = 0;
  for (const auto& row : rows) {
    match += row.gold_in_candidates ? 1 : 0;
    h1 += row.gold_rank && *row.gold_rank <= 1 ? 1 : 0;
    h2 += row.gold_rank && *row.gold_rank <= 2 ? 1 : 0;
  }
  if (r.n_queries > 0) {
    const auto n = static_cast<double>(r.n_queries);
    r.match_rate = static_cast<double>(match) / n;
    r.hit_at_1 = static_cast<double>(h1) / n;
    r.hit_at_2 = static_cast<double>(h2) / n;
  }
  r.rows = std::move(rows);
  return r;
}

namespace {

QueryRow score_query(const LabeledQuery& q, const GraphStore& graph, const MatchConfig& config,
                     const Providers& providers, const TypeNormalizer& types) {
  QueryRow row;
  row.query_id = q.record.record_id;
  try {
    const auto gold = graph.find_context(q.gold_context_id);
    if (!gold) {
      row.error = "gold context '" + q.gold_context_id + "' not in graph";
      return row;
    }
    const ContextResult r = run_pipeline(q.record, graph, config, providers, types);
    row.candidate_count = r.candidates.size();
    row.gold_in_candidates = std::binary_search(r.candidates.begin(), r.candidates.end(), *gold);
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
      if (r.ranked[i].id == *gold) {
        row.gold_rank = i + 1;
        break;
      }
    }
    if (r.no_entity_match) row.error = "no entity match";
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

MetricsReport evaluate_serial(std::span<const LabeledQuery> queries, const GraphStore& graph,
                              const MatchConfig& config, const Providers& providers,
                              const TypeNormalizer& types) {
  if (queries.empty()) throw std::invalid_argument("evaluation needs at least one query");
  config.validate();
  std::vector<QueryRow> rows;
  for (const auto& q : queries) rows.push_back(score_query(q, graph, config, providers, types));
  return summarize(std::move(rows));
}

MetricsReport evaluate(std::span<const LabeledQuery> queries, const GraphStore& graph,
                       const MatchConfig& config, const Providers& providers,
                       const TypeNormalizer& types, int jobs) {
  if (queries.empty()) throw std::invalid_argument("evaluation needs at least one query");
  config.validate();
  std::vector<QueryRow> rows(queries.size());
  const auto n = static_cast<long long>(queries.size());
  // score_query catches everything, so no exception leaves the region.
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(jobs, 1)) if (jobs > 1)
  for (long long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    rows[idx] = score_query(queries[idx], graph, config, providers, types);
  }
  return summarize(std::move(rows));
}

std::vector<AblationRow> run_ablation(std::span<const LabeledQuery> queries,
                                      const GraphStore& graph, const MatchConfig& base_config,
                                      const Providers& providers, const TypeNormalizer& types,
                                      int jobs) {
  const std::pair<MatchMode, SimilarityMode> layout[] = {
      {MatchMode::ES, SimilarityMode::Semantic},
      {MatchMode::EE, SimilarityMode::Semantic},
      {MatchMode::EE, SimilarityMode::Action},
      {MatchMode::EE, SimilarityMode::SemanticAction},
      {MatchMode::EES, SimilarityMode::Semantic},
      {MatchMode::EES, SimilarityMode::Action},
      {MatchMode::EES, SimilarityMode::SemanticAction},
  };
  std::vector<AblationRow> out;
  for (const auto& [mode, sim] : layout) {
    MatchConfig c = base_config;
    c.mode = mode;
    c.similarity = sim;
    CountingEmbedder counted(providers.events);
    const Providers p(counted, providers.scenes, providers.actions);
    out.push_back({mode, sim, evaluate(queries, graph, c, p, types, jobs), counted.calls()});
  }
  return out;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void write_report(std::ostream& out, const MetricsReport& r, bool with_rows) {
  out << "Queries\tMatch\tHit@1\tHit@2\n";
  out << r.n_queries << '\t' << fixed4(r.match_rate) << '\t' << fixed4(r.hit_at_1) << '\t'
      << fixed4(r.hit_at_2) << '\n';
  if (!with_rows) return;
  out << "\nQueryId\tCandidates\tGoldRank\tNote\n";
  for (const auto& row : r.rows) {
    out << row.query_id << '\t' << row.candidate_count << '\t'
        << (row.gold_rank ? std::to_string(*row.gold_rank) : "-") << '\t' << row.error << '\n';
  }
}

void write_ablation(std::ostream& out, std::span<const AblationRow> rows) {
  out << "Method\tSimilarity\tMatch\tHit@1\tHit@2\n";
  for (const auto& row : rows) {
    out << to_string(row.mode) << '\t' << to_string(row.similarity) << '\t'
        << fixed4(row.metrics.match_rate) << '\t' << fixed4(row.metrics.hit_at_1) << '\t'
        << fixed4(row.metrics.hit_at_2) << '\n';
  }
}

}  // namespace ees
