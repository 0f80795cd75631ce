#include "ees/cli.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "ees/evaluation.hpp"
#include "ees/pipeline.hpp"
#include "ees/query.hpp"
#include "ees/remote_embedder.hpp"

namespace ees::cli {

namespace {

struct Common {
  std::string graph;
  std::string config;
  std::string lexicon;
  std::string aliases;
  std::string embedder = "reference";
  std::string out;
  int jobs = 1;
};

void add_embedder_flag(CLI::App* cmd, Common& c) {
  cmd->add_option("--embedder", c.embedder,
                  "Embedding provider: reference, or remote (POSTs to $EES_EMBED_URL)")
      ->check(CLI::IsMember({"reference", "remote"}))
      ->capture_default_str();
}

void add_matching_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--graph", c.graph, "Graph snapshot")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", c.config, "Match config (key=value)")->check(CLI::ExistingFile);
  cmd->add_option("--lexicon", c.lexicon, "Action lexicon, one phrase per line")
      ->check(CLI::ExistingFile);
  cmd->add_option("--aliases", c.aliases, "Extra entity type aliases (raw = Canonical)")
      ->check(CLI::ExistingFile);
  add_embedder_flag(cmd, c);
  cmd->add_option("--out", c.out, "Write results here instead of standard output");
}

std::unique_ptr<EmbeddingProvider> make_embedder(const std::string& name) {
  if (name == "remote") return std::make_unique<RemoteEmbedder>(RemoteEmbedder::from_env());
  return std::make_unique<ReferenceEmbedder>();
}

TypeNormalizer make_types(const Common& c) {
  return c.aliases.empty() ? TypeNormalizer() : TypeNormalizer::from_file(c.aliases);
}

LexiconActionExtractor make_extractor(const Common& c) {
  return c.lexicon.empty() ? LexiconActionExtractor() : LexiconActionExtractor::from_file(c.lexicon);
}

MatchConfig make_config(const Common& c) {
  return c.config.empty() ? MatchConfig{} : load_match_config(c.config);
}

// Writes to --out when given, otherwise to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string fmt_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fmt_scored(const std::vector<Scored>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i].id) + ":" + fmt_score(xs[i].score);
  }
  return out.empty() ? "-" : out;
}

void write_match_block(std::ostream& out, const LabeledQuery& q, const ContextResult& r,
                       const GraphStore& g) {
  out << "query\t" << q.record.record_id << '\n';
  std::string matched;
  for (NodeId id : r.matched_entities) matched += (matched.empty() ? "" : ",") + std::to_string(id);
  out << "matched_entities\t" << (matched.empty() ? "-" : matched) << '\n';
  std::string unmatched;
  for (std::size_t i : r.unmatched_entities) {
    unmatched += (unmatched.empty() ? "" : ",") + q.record.entities[i].name;
  }
  out << "unmatched_entities\t" << (unmatched.empty() ? "-" : unmatched) << '\n';
  if (r.no_entity_match) {
    out << "no_entity_match\n\n";
    return;
  }
  out << "top_events\t" << fmt_scored(r.top_events) << '\n';
  out << "top_scenes\t" << fmt_scored(r.top_scenes) << '\n';
  out << "rank\tcontext\tcontext_id\ttotal\tentity\tevent\tscene\n";
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    const auto& c = r.ranked[i];
    out << i + 1 << '\t' << c.id << '\t' << g.context(c.id).key << '\t' << fmt_score(c.total)
        << '\t' << fmt_score(c.entity_overlap) << '\t'
        << (c.event ? fmt_score(*c.event) : "-") << '\t'
        << (c.scene ? fmt_score(*c.scene) : "-") << '\n';
  }
  out << '\n';
}

int cmd_ingest(const std::string& corpus, const std::string& out_path, const Common& c,
               std::ostream& out, std::ostream& err) {
  std::ifstream in(corpus);
  if (!in) throw std::runtime_error("cannot open " + corpus);
  const TypeNormalizer types = make_types(c);
  BuildResult built = build_graph(in, types);
  built.graph.set_embedding_dim(make_embedder(c.embedder)->dim());
  for (const auto& rej : built.report.rejections) {
    err << corpus << ':' << rej.line << ": rejected (" << rej.rule << "): " << rej.message << '\n';
  }
  const auto& rep = built.report;
  if (rep.read > 0 && rep.accepted == 0) {
    err << "ees: data error: " << corpus << ": no valid records\n";
    return kData;
  }
  built.graph.save_snapshot(out_path);
  out << "read\t" << rep.read << "\naccepted\t" << rep.accepted << "\nrejected\t" << rep.rejected
      << "\nwarnings\t" << rep.warnings << "\nnodes\t" << rep.nodes << "\nedges\t" << rep.edges
      << '\n';
  return kOk;
}

int cmd_match(const std::string& query_path, const Common& c, std::ostream& out) {
  const GraphStore g = GraphStore::load_snapshot(c.graph);
  const auto queries = read_labeled_queries(query_path, false);
  const MatchConfig config = make_config(c);
  const auto embedder = make_embedder(c.embedder);
  const auto extractor = make_extractor(c);
  const TypeNormalizer types = make_types(c);
  const Providers providers(*embedder, extractor);
  Sink sink(c.out, out);
  for (const auto& q : queries) {
    write_match_block(sink.get(), q, run_pipeline(q.record, g, config, providers, types), g);
  }
  return kOk;
}

int cmd_eval(const std::string& query_path, bool rows, bool ablate, const Common& c,
             std::ostream& out) {
  const GraphStore g = GraphStore::load_snapshot(c.graph);
  const auto queries = read_labeled_queries(query_path, true);
  if (queries.empty()) throw std::runtime_error(query_path + ": no queries");
  const MatchConfig config = make_config(c);
  const auto embedder = make_embedder(c.embedder);
  const CachingEmbedder cached(*embedder);
  const auto extractor = make_extractor(c);
  const TypeNormalizer types = make_types(c);
  const Providers providers(cached, extractor);
  Sink sink(c.out, out);
  if (ablate) {
    write_ablation(sink.get(), run_ablation(queries, g, config, providers, types, c.jobs));
  } else {
    write_report(sink.get(), evaluate(queries, g, config, providers, types, c.jobs), rows);
  }
  return kOk;
}

int cmd_fixture(std::size_t contexts, std::uint64_t seed, const std::string& corpus_out,
                const std::string& queries_out, const std::string& lexicon_out,
                std::ostream& out) {
  const Fixture fx = generate_fixture(contexts, seed);
  {
    Sink s(corpus_out, out);
    for (const auto& r : fx.corpus) s.get() << serialize_record(r) << '\n';
  }
  {
    Sink s(queries_out, out);
    for (const auto& q : fx.queries) s.get() << serialize_labeled_query(q) << '\n';
  }
  if (!lexicon_out.empty()) {
    Sink s(lexicon_out, out);
    s.get() << "# fixture action lexicon\n";
    for (const auto& a : fx.action_lexicon) s.get() << a << '\n';
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity-event-scene knowledge graph matching", "ees"};
  app.require_subcommand(1);

  Common ingest_opts;
  std::string corpus, snapshot_out;
  auto* ingest = app.add_subcommand("ingest", "Build a graph snapshot from a JSONL corpus");
  ingest->add_option("--corpus", corpus, "Corpus, one record per line")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--out", snapshot_out, "Snapshot to write")->required();
  ingest->add_option("--aliases", ingest_opts.aliases, "Extra entity type aliases")
      ->check(CLI::ExistingFile);
  add_embedder_flag(ingest, ingest_opts);

  Common match_opts;
  std::string match_query;
  auto* match = app.add_subcommand("match", "Rank contexts for each query record");
  add_matching_flags(match, match_opts);
  match->add_option("--query", match_query, "Query records (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);

  Common eval_opts;
  std::string eval_queries;
  bool eval_rows = false;
  auto* eval = app.add_subcommand("eval", "Match / Hit@1 / Hit@2 over labeled queries");
  add_matching_flags(eval, eval_opts);
  eval->add_option("--queries", eval_queries, "Labeled queries (JSONL with gold_context_id)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--jobs", eval_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  eval->add_flag("--rows", eval_rows, "Append per-query rows");

  Common ablate_opts;
  std::string ablate_queries;
  auto* ablate = app.add_subcommand("ablate", "ES / EE / EES x similarity ablation table");
  add_matching_flags(ablate, ablate_opts);
  ablate->add_option("--queries", ablate_queries, "Labeled queries (JSONL with gold_context_id)")
      ->required()
      ->check(CLI::ExistingFile);
  ablate->add_option("--jobs", ablate_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::size_t fx_contexts = 50;
  std::uint64_t fx_seed = 42;
  std::string fx_corpus, fx_queries, fx_lexicon;
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic planted-gold corpus");
  fixture->add_option("--contexts", fx_contexts, "Number of contexts (>= 2)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
      ->capture_default_str();
  fixture->add_option("--seed", fx_seed, "RNG seed")->capture_default_str();
  fixture->add_option("--corpus-out", fx_corpus, "Corpus JSONL to write")->required();
  fixture->add_option("--queries-out", fx_queries, "Labeled queries JSONL to write")->required();
  fixture->add_option("--lexicon-out", fx_lexicon, "Write the fixture's action lexicon here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(corpus, snapshot_out, ingest_opts, out, err);
    if (*match) return cmd_match(match_query, match_opts, out);
    if (*eval) return cmd_eval(eval_queries, eval_rows, false, eval_opts, out);
    if (*ablate) return cmd_eval(ablate_queries, false, true, ablate_opts, out);
    if (*fixture) return cmd_fixture(fx_contexts, fx_seed, fx_corpus, fx_queries, fx_lexicon, out);
  } catch (const std::logic_error& e) {
    err << "ees: internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::runtime_error& e) {
    err << "ees: data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "ees: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace ees::cli
