#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnmc/data.hpp"
#include "bnmc/metrics.hpp"

namespace bnmc {

// Synthetic data drawn from each fixture's own generative process, used by
// the bench harness and the test suites.

struct LdaCorpus {
  DataFile train;
  DataFile heldout;                 // same vocabulary, fresh documents
  std::vector<double> true_phi;     // K x V rows used to generate both
  HeldoutCorpus heldout_docs;       // token view of `heldout`
};

LdaCorpus gen_lda(long long docs, long long vocab, long long topics, long long doc_len,
                  long long heldout_docs, std::uint64_t seed);

struct RegressionTruth {
  DataFile data;
  std::vector<double> w;
  double b = 0.0;
  double noise_var = 0.0;
};

RegressionTruth gen_regression(long long n, long long k, double noise_var, std::uint64_t seed);

struct GmmTruth {
  DataFile data;
  std::vector<double> centers;
  std::vector<double> stds;
};

GmmTruth gen_gmm(long long n, std::vector<double> centers, std::vector<double> stds,
                 std::uint64_t seed);

DataFile gen_catmix(long long n, long long clusters, long long vocab, std::uint64_t seed);
DataFile gen_hmm(long long n, long long states, std::uint64_t seed);
DataFile gen_naivebayes(long long n, long long features, std::uint64_t seed);
DataFile gen_polyreg(long long n, long long order, std::uint64_t seed);

// Tokenizes whitespace-separated text into a one-document-per-line corpus.
DataFile corpus_from_text(const std::string& text);

}  // namespace bnmc
