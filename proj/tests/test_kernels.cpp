#include <gtest/gtest.h>

#include <omp.h>

#include "ees/kernels.hpp"
#include "oracles.hpp"

using namespace ees;

namespace {

std::vector<Embedding> random_embeddings(oracle::Rng& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> nd;
  std::vector<Embedding> out(n);
  for (auto& e : out) {
    e.components.resize(dim);
    for (double& x : e.components) x = nd(rng);
  }
  return out;
}

class ThreadsGuard {
 public:
  explicit ThreadsGuard(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadsGuard() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

}  // namespace

TEST(Kernels, CosineMatrixParallelEqualsSerial) {
  ThreadsGuard threads(4);
  oracle::Rng rng(41);
  for (std::size_t n : {0u, 1u, 7u, 60u}) {
    const auto a = random_embeddings(rng, n, 64);
    const auto b = random_embeddings(rng, n + 3, 64);
    const auto par = kernels::cosine_matrix(a, b);
    const auto ser = kernels::cosine_matrix_serial(a, b);
    ASSERT_EQ(par.size(), a.size() * b.size());
    EXPECT_EQ(par, ser);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        EXPECT_EQ(ser[i * b.size() + j], cosine(a[i], b[j]));
      }
    }
  }
}

TEST(Kernels, BlockMaxParallelEqualsSerial) {
  ThreadsGuard threads(4);
  oracle::Rng rng(42);
  const std::size_t rows = 13, cols = 29, rg = 4, cg = 6;
  std::vector<double> m(rows * cols);
  for (double& x : m) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  std::vector<std::size_t> row_group(rows), col_group(cols);
  for (auto& g : row_group) g = oracle::pick(rng, rg - 1);  // last row group stays empty
  for (auto& g : col_group) g = oracle::pick(rng, cg);
  const auto par = kernels::block_max(m, rows, cols, row_group, rg, col_group, cg);
  const auto ser = kernels::block_max_serial(m, rows, cols, row_group, rg, col_group, cg);
  EXPECT_EQ(par, ser);

  for (std::size_t a = 0; a < rg; ++a) {
    for (std::size_t b = 0; b < cg; ++b) {
      bool any = false;
      double best = 0;
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          if (row_group[i] != a || col_group[j] != b) continue;
          best = any ? std::max(best, m[i * cols + j]) : m[i * cols + j];
          any = true;
        }
      }
      EXPECT_EQ(ser[a * cg + b], any ? best : 0.0);
    }
  }
}

TEST(Kernels, EmbedEachParallelEqualsSerial) {
  ThreadsGuard threads(4);
  oracle::Rng rng(43);
  std::vector<std::string> texts;
  for (int i = 0; i < 300; ++i) texts.push_back(oracle::random_text(rng, true));
  const ReferenceEmbedder emb;
  CountingEmbedder counting(emb);
  const auto par = kernels::embed_each(counting, texts);
  EXPECT_EQ(counting.calls(), texts.size());
  EXPECT_EQ(par, kernels::embed_each_serial(emb, texts));
}
