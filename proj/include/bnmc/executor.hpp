#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bnmc {

// Bounded fork-join worker pool. Work is split into chunks whose size depends
// only on the problem size, never on the worker count; reductions combine
// per-chunk partials in chunk order. Together these make every result
// bit-identical across worker counts.
class ParallelExecutor {
 public:
  explicit ParallelExecutor(int workers);
  ~ParallelExecutor();
  ParallelExecutor(const ParallelExecutor&) = delete;
  ParallelExecutor& operator=(const ParallelExecutor&) = delete;

  int workers() const { return workers_; }

  // Upper bound on the number of chunks a range is split into.
  static constexpr std::int64_t kMaxChunks = 64;

  static std::int64_t chunk_size(std::int64_t n) {
    return n <= kMaxChunks ? 1 : (n + kMaxChunks - 1) / kMaxChunks;
  }

  using RangeFn = std::function<void(std::int64_t, std::int64_t)>;

  // Runs fn over disjoint subranges covering [0, n). fn must only perform
  // writes that are disjoint across subranges.
  void parallel_for(std::int64_t n, const RangeFn& fn);

  // Deterministic sum reduction: chunk_fn returns the partial sum of a
  // subrange; partials are added in chunk index order.
  double reduce_sum(std::int64_t n,
                    const std::function<double(std::int64_t, std::int64_t)>& chunk_fn);

  // Deterministic vector accumulation: chunk_fn adds its subrange's
  // contribution into a zeroed buffer of `width` doubles; buffers are folded
  // into out[0..width) in chunk index order.
  void reduce_accumulate(std::int64_t n, std::int64_t width, double* out,
                         const std::function<void(std::int64_t, std::int64_t, double*)>& chunk_fn);

 private:
  // Runs fn(chunk_index) for every chunk of [0, n); the calling thread
  // participates.
  void run_chunks(std::int64_t nchunks, const std::function<void(std::int64_t)>& fn);
  void worker_loop();

  int workers_;
  std::vector<std::thread> threads_;

  std::mutex mu_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  std::uint64_t generation_ = 0;
  bool stop_ = false;

  const std::function<void(std::int64_t)>* job_fn_ = nullptr;
  std::int64_t job_chunks_ = 0;
  std::atomic<std::int64_t> next_chunk_{0};
  std::atomic<std::int64_t> done_chunks_{0};
};

}  // namespace bnmc
