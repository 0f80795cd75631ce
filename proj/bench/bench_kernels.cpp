// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "ees/evaluation.hpp"
#include "ees/kernels.hpp"

namespace {

std::vector<ees::Embedding> random_embeddings(std::size_t n, std::size_t dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<ees::Embedding> out(n);
  for (auto& e : out) {
    e.components.resize(dim);
    for (double& x : e.components) x = nd(rng);
  }
  return out;
}

void BM_CosineMatrixSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_embeddings(n, 256, 1), b = random_embeddings(n, 256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ees::kernels::cosine_matrix_serial(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

void BM_CosineMatrixParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_embeddings(n, 256, 1), b = random_embeddings(n, 256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ees::kernels::cosine_matrix(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

std::vector<std::string> texts(std::size_t n) {
  const auto fx = ees::generate_fixture(n, 7);
  std::vector<std::string> out;
  for (const auto& r : fx.corpus) out.push_back(r.scene.description + " " + r.events[0].description);
  return out;
}

void BM_EmbedSerial(benchmark::State& state) {
  const auto t = texts(static_cast<std::size_t>(state.range(0)));
  const ees::ReferenceEmbedder emb;
  for (auto _ : state) benchmark::DoNotOptimize(ees::kernels::embed_each_serial(emb, t));
}

void BM_EmbedParallel(benchmark::State& state) {
  const auto t = texts(static_cast<std::size_t>(state.range(0)));
  const ees::ReferenceEmbedder emb;
  for (auto _ : state) benchmark::DoNotOptimize(ees::kernels::embed_each(emb, t));
}

struct EvalSetup {
  ees::Fixture fx = ees::generate_fixture(200, 42);
  ees::TypeNormalizer types;
  ees::GraphStore graph = ees::build_graph(fx.corpus, types).graph;
  ees::ReferenceEmbedder emb;
  ees::LexiconActionExtractor extractor{fx.action_lexicon};
};

void BM_EvaluateSerial(benchmark::State& state) {
  static EvalSetup s;
  const ees::Providers p(s.emb, s.extractor);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ees::evaluate_serial(s.fx.queries, s.graph, {}, p, s.types));
  }
}

void BM_EvaluateParallel(benchmark::State& state) {
  static EvalSetup s;
  const ees::Providers p(s.emb, s.extractor);
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ees::evaluate(s.fx.queries, s.graph, {}, p, s.types, jobs));
  }
}

}  // namespace

BENCHMARK(BM_CosineMatrixSerial)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_CosineMatrixParallel)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_EmbedSerial)->Arg(256)->Arg(2048);
BENCHMARK(BM_EmbedParallel)->Arg(256)->Arg(2048);
BENCHMARK(BM_EvaluateSerial);
BENCHMARK(BM_EvaluateParallel)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
