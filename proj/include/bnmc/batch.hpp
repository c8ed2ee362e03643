#pragma once

#include <cstdint>
#include <span>

#include "bnmc/executor.hpp"
#include "bnmc/rng.hpp"

namespace bnmc {

// Strategy for generating a matrix of Dirichlet variates: one worker per row,
// or one worker per column of gamma variates followed by a row-sum
// normalization pass. Both produce identical output for the same key because
// each gamma cell is drawn from its own (row, col)-keyed stream.
enum class BatchStrategy { RowParallel, ColumnParallel, Auto };

struct BatchSpec {
  std::int64_t rows = 0;  // number of variates M
  std::int64_t cols = 0;  // dimension V
  // Concentrations: size cols when shared across rows, rows*cols otherwise.
  std::span<const double> alpha;
  bool per_row = false;
  BatchStrategy strategy = BatchStrategy::Auto;
  // Auto picks ColumnParallel when rows < workers and cols >= col_ratio*rows.
  int col_ratio = 4;
};

BatchStrategy resolve_batch_strategy(const BatchSpec& spec, int workers);

// Fills out (rows*cols, row-major) with Dirichlet variates; each row is a
// probability vector. Throws std::invalid_argument on nonpositive
// concentrations or size mismatches.
void sample_dirichlet_batch(const BatchSpec& spec, const RngStream& key, ParallelExecutor& pool,
                            std::span<double> out);

}  // namespace bnmc
