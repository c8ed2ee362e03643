#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnmc/gen.hpp"
#include "bnmc/metrics.hpp"
#include "bnmc/sampler.hpp"

namespace bnmc {

struct LppPoint {
  long long samples = 0;
  double lpp = 0.0;
  double seconds = 0.0;  // cumulative training time up to this sample
};

// Train-then-test evaluation: for each checkpoint (powers of two up to the
// trace length), clamp phi at that sample, fit the held-out documents' theta
// with phi observed, and score the held-out tokens.
std::vector<LppPoint> lpp_curve(const CheckedModel& model, const Trace& train_trace,
                                const DataFile& heldout, const HeldoutCorpus& heldout_docs,
                                long long fit_sweeps, std::uint64_t seed, int threads);

// One train/test split of a regression data set: fit with random-walk
// Metropolis, predict with the posterior mean of the second half of the
// trace, and report the held-out RMSE.
double regression_rmse_once(const CheckedModel& model, const DataFile& full, double test_frac,
                            long long samples, std::uint64_t split_seed, std::uint64_t chain_seed,
                            double mh_scale, int threads);

// Averages regression_rmse_once over several splits.
double regression_split_rmse(const CheckedModel& model, const DataFile& full, int splits,
                             long long samples, std::uint64_t seed, double mh_scale, int threads);

struct BenchPoint {
  double x = 0.0;
  double value = 0.0;    // seconds per sample
  double seconds = 0.0;  // total wall clock
};

std::vector<BenchPoint> bench_gmm_sizes(const std::vector<long long>& sizes, long long samples,
                                        std::uint64_t seed, int threads);
std::vector<BenchPoint> bench_lda_topics(const std::vector<long long>& topics, long long docs,
                                         long long vocab, long long doc_len, long long samples,
                                         std::uint64_t seed, int threads);

// CSV with the header `x,value,seconds`.
std::string bench_csv(const std::vector<BenchPoint>& points);

}  // namespace bnmc
