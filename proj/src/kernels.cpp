#include "ees/kernels.hpp"

#include <algorithm>

namespace ees::kernels {

namespace {

// Below this many cells the fork/join cost dominates.
constexpr std::size_t kParallelCells = 2048;

}  // namespace

std::vector<double> cosine_matrix_serial(std::span<const Embedding> a,
                                         std::span<const Embedding> b) {
  std::vector<double> out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = cosine(a[i], b[j]);
  }
  return out;
}

std::vector<double> cosine_matrix(std::span<const Embedding> a, std::span<const Embedding> b) {
  const std::size_t rows = a.size(), cols = b.size();
  std::vector<double> out(rows * cols);
  const auto cells = static_cast<long long>(rows * cols);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelCells)
  for (long long k = 0; k < cells; ++k) {
    const auto i = static_cast<std::size_t>(k) / cols;
    const auto j = static_cast<std::size_t>(k) % cols;
    out[static_cast<std::size_t>(k)] = cosine(a[i], b[j]);
  }
  return out;
}

std::vector<double> block_max_serial(std::span<const double> m, std::size_t rows, std::size_t cols,
                                     std::span<const std::size_t> row_group, std::size_t row_groups,
                                     std::span<const std::size_t> col_group,
                                     std::size_t col_groups) {
  std::vector<double> out(row_groups * col_groups, 0.0);
  std::vector<bool> seen(row_groups * col_groups, false);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t cell = row_group[i] * col_groups + col_group[j];
      const double v = m[i * cols + j];
      if (!seen[cell] || v > out[cell]) out[cell] = v;
      seen[cell] = true;
    }
  }
  return out;
}

std::vector<double> block_max(std::span<const double> m, std::size_t rows, std::size_t cols,
                              std::span<const std::size_t> row_group, std::size_t row_groups,
                              std::span<const std::size_t> col_group, std::size_t col_groups) {
  // Each output column group is owned by one iteration, so no two threads
  // write the same cell.
  std::vector<double> out(row_groups * col_groups, 0.0);
  std::vector<char> seen(row_groups * col_groups, 0);
  std::vector<std::vector<std::size_t>> cols_of(col_groups);
  for (std::size_t j = 0; j < cols; ++j) cols_of[col_group[j]].push_back(j);
  const auto groups = static_cast<long long>(col_groups);
#pragma omp parallel for schedule(dynamic, 8) if (rows * cols >= kParallelCells)
  for (long long g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j : cols_of[static_cast<std::size_t>(g)]) {
        const std::size_t cell = row_group[i] * col_groups + static_cast<std::size_t>(g);
        const double v = m[i * cols + j];
        if (!seen[cell] || v > out[cell]) out[cell] = v;
        seen[cell] = 1;
      }
    }
  }
  return out;
}

std::vector<Embedding> embed_each_serial(const EmbeddingProvider& provider,
                                         std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(provider.embed(t));
  return out;
}

std::vector<Embedding> embed_each(const EmbeddingProvider& provider,
                                  std::span<const std::string> texts) {
  std::vector<Embedding> out(texts.size());
  const auto n = static_cast<long long>(texts.size());
#pragma omp parallel for schedule(dynamic, 16) if (n >= 64)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = provider.embed(texts[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace ees::kernels
