#include "bnmc/batch.hpp"

#include <stdexcept>

#include "bnmc/dist.hpp"

namespace bnmc {

BatchStrategy resolve_batch_strategy(const BatchSpec& spec, int workers) {
  if (spec.strategy != BatchStrategy::Auto) return spec.strategy;
  if (spec.rows < workers && spec.cols >= spec.col_ratio * spec.rows) {
    return BatchStrategy::ColumnParallel;
  }
  return BatchStrategy::RowParallel;
}

namespace {

void validate(const BatchSpec& spec, std::span<double> out) {
  if (spec.rows < 1 || spec.cols < 1) throw std::invalid_argument("batch needs rows, cols >= 1");
  const std::size_t want = static_cast<std::size_t>(spec.per_row ? spec.rows * spec.cols : spec.cols);
  if (spec.alpha.size() != want) throw std::invalid_argument("concentration size mismatch");
  for (double a : spec.alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("Dirichlet concentrations must be positive");
  }
  if (out.size() != static_cast<std::size_t>(spec.rows * spec.cols)) {
    throw std::invalid_argument("batch output size mismatch");
  }
}

double cell_alpha(const BatchSpec& spec, std::int64_t r, std::int64_t c) {
  return spec.per_row ? spec.alpha[static_cast<std::size_t>(r * spec.cols + c)]
                      : spec.alpha[static_cast<std::size_t>(c)];
}

// One stream per cell; the draw is the same no matter which strategy or
// worker produced it.
double cell_gamma(const BatchSpec& spec, const RngStream& key, std::int64_t r, std::int64_t c) {
  RngStream rng = key.derive(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
  return draw_gamma(rng, cell_alpha(spec, r, c));
}

}  // namespace

void sample_dirichlet_batch(const BatchSpec& spec, const RngStream& key, ParallelExecutor& pool,
                            std::span<double> out) {
  validate(spec, out);
  const std::int64_t rows = spec.rows, cols = spec.cols;
  const BatchStrategy strategy = resolve_batch_strategy(spec, pool.workers());

  if (strategy == BatchStrategy::RowParallel) {
    pool.parallel_for(rows, [&](std::int64_t r0, std::int64_t r1) {
      for (std::int64_t r = r0; r < r1; ++r) {
        double* row = out.data() + r * cols;
        double sum = 0.0;
        for (std::int64_t c = 0; c < cols; ++c) {
          row[c] = cell_gamma(spec, key, r, c);
          sum += row[c];
        }
        for (std::int64_t c = 0; c < cols; ++c) row[c] /= sum;
      }
    });
    return;
  }

  // ColumnParallel: fill gamma variates column by column, then normalize each
  // row. The row sum runs left to right, matching the RowParallel order.
  pool.parallel_for(cols, [&](std::int64_t c0, std::int64_t c1) {
    for (std::int64_t c = c0; c < c1; ++c) {
      for (std::int64_t r = 0; r < rows; ++r) {
        out[static_cast<std::size_t>(r * cols + c)] = cell_gamma(spec, key, r, c);
      }
    }
  });
  pool.parallel_for(rows, [&](std::int64_t r0, std::int64_t r1) {
    for (std::int64_t r = r0; r < r1; ++r) {
      double* row = out.data() + r * cols;
      double sum = 0.0;
      for (std::int64_t c = 0; c < cols; ++c) sum += row[c];
      for (std::int64_t c = 0; c < cols; ++c) row[c] /= sum;
    }
  });
}

}  // namespace bnmc
