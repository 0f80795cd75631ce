#pragma once
// Data-parallel similarity kernels. Every OpenMP kernel has a serial twin
// with identical per-element arithmetic, so results agree bit for bit; the
// serial versions are kept for tests and benchmarks.

#include <span>
#include <string>
#include <vector>

#include "ees/similarity.hpp"

namespace ees::kernels {

// Row-major |a| x |b| matrix of cosine(a[i], b[j]).
std::vector<double> cosine_matrix(std::span<const Embedding> a, std::span<const Embedding> b);
std::vector<double> cosine_matrix_serial(std::span<const Embedding> a,
                                         std::span<const Embedding> b);

// Collapses a rows x cols matrix to groups x groups by taking the maximum
// over each block. row_group[i] / col_group[j] give each row's / column's
// group; empty blocks are 0.
std::vector<double> block_max(std::span<const double> matrix, std::size_t rows, std::size_t cols,
                              std::span<const std::size_t> row_group, std::size_t row_groups,
                              std::span<const std::size_t> col_group, std::size_t col_groups);
std::vector<double> block_max_serial(std::span<const double> matrix, std::size_t rows,
                                     std::size_t cols, std::span<const std::size_t> row_group,
                                     std::size_t row_groups, std::span<const std::size_t> col_group,
                                     std::size_t col_groups);

// Calls provider.embed once per text.
std::vector<Embedding> embed_each(const EmbeddingProvider& provider,
                                  std::span<const std::string> texts);
std::vector<Embedding> embed_each_serial(const EmbeddingProvider& provider,
                                         std::span<const std::string> texts);

}  // namespace ees::kernels
