#pragma once

#include <span>
#include <vector>

namespace bnmc {

// Held-out corpus for predictive scoring: token ids per document.
struct HeldoutCorpus {
  std::vector<std::vector<long long>> docs;
};

// Sum over held-out tokens of log10 sum_k theta[d,k] * phi[k,w]. Rows of phi
// (K x V) and theta (D x K) must be probability vectors. Throws on a token id
// outside the vocabulary.
double log_predictive_probability(std::span<const double> phi, std::span<const double> theta,
                                  long long topics, long long vocab,
                                  const HeldoutCorpus& heldout);

// Root mean squared error; throws on length mismatch or empty input.
double rmse(std::span<const double> predictions, std::span<const double> targets);

}  // namespace bnmc
