#include "bnmc/executor.hpp"

#include <algorithm>

namespace bnmc {

ParallelExecutor::ParallelExecutor(int workers) : workers_(std::max(1, workers)) {
  threads_.reserve(static_cast<std::size_t>(workers_ - 1));
  for (int i = 0; i < workers_ - 1; ++i) {
    threads_.emplace_back([this] { worker_loop(); });
  }
}

ParallelExecutor::~ParallelExecutor() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
    ++generation_;
  }
  cv_start_.notify_all();
  for (auto& t : threads_) t.join();
}

void ParallelExecutor::worker_loop() {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(std::int64_t)>* fn = nullptr;
    std::int64_t nchunks = 0;
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_start_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      fn = job_fn_;
      nchunks = job_chunks_;
    }
    for (;;) {
      const std::int64_t ci = next_chunk_.fetch_add(1, std::memory_order_relaxed);
      if (ci >= nchunks) break;
      (*fn)(ci);
      if (done_chunks_.fetch_add(1, std::memory_order_acq_rel) + 1 == nchunks) {
        cv_done_.notify_one();
      }
    }
  }
}

void ParallelExecutor::run_chunks(std::int64_t nchunks, const std::function<void(std::int64_t)>& fn) {
  if (nchunks <= 0) return;
  if (workers_ == 1 || nchunks == 1) {
    for (std::int64_t ci = 0; ci < nchunks; ++ci) fn(ci);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    job_fn_ = &fn;
    job_chunks_ = nchunks;
    next_chunk_.store(0, std::memory_order_relaxed);
    done_chunks_.store(0, std::memory_order_relaxed);
    ++generation_;
  }
  cv_start_.notify_all();
  for (;;) {
    const std::int64_t ci = next_chunk_.fetch_add(1, std::memory_order_relaxed);
    if (ci >= nchunks) break;
    fn(ci);
    done_chunks_.fetch_add(1, std::memory_order_acq_rel);
  }
  std::unique_lock<std::mutex> lock(mu_);
  cv_done_.wait(lock, [&] { return done_chunks_.load(std::memory_order_acquire) == job_chunks_; });
  job_fn_ = nullptr;
}

void ParallelExecutor::parallel_for(std::int64_t n, const RangeFn& fn) {
  if (n <= 0) return;
  const std::int64_t chunk = chunk_size(n);
  const std::int64_t nchunks = (n + chunk - 1) / chunk;
  run_chunks(nchunks, [&](std::int64_t ci) {
    const std::int64_t lo = ci * chunk;
    fn(lo, std::min(n, lo + chunk));
  });
}

double ParallelExecutor::reduce_sum(
    std::int64_t n, const std::function<double(std::int64_t, std::int64_t)>& chunk_fn) {
  if (n <= 0) return 0.0;
  const std::int64_t chunk = chunk_size(n);
  const std::int64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
  run_chunks(nchunks, [&](std::int64_t ci) {
    const std::int64_t lo = ci * chunk;
    partial[static_cast<std::size_t>(ci)] = chunk_fn(lo, std::min(n, lo + chunk));
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void ParallelExecutor::reduce_accumulate(
    std::int64_t n, std::int64_t width, double* out,
    const std::function<void(std::int64_t, std::int64_t, double*)>& chunk_fn) {
  if (n <= 0) return;
  const std::int64_t chunk = chunk_size(n);
  const std::int64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks * width), 0.0);
  run_chunks(nchunks, [&](std::int64_t ci) {
    const std::int64_t lo = ci * chunk;
    chunk_fn(lo, std::min(n, lo + chunk), partial.data() + ci * width);
  });
  for (std::int64_t ci = 0; ci < nchunks; ++ci) {
    const double* p = partial.data() + ci * width;
    for (std::int64_t j = 0; j < width; ++j) out[j] += p[j];
  }
}

}  // namespace bnmc
