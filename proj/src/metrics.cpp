#include "bnmc/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bnmc {

double log_predictive_probability(std::span<const double> phi, std::span<const double> theta,
                                  long long topics, long long vocab,
                                  const HeldoutCorpus& heldout) {
  if (phi.size() != static_cast<std::size_t>(topics * vocab)) {
    throw std::invalid_argument("phi must be topics x vocab");
  }
  if (theta.size() != heldout.docs.size() * static_cast<std::size_t>(topics)) {
    throw std::invalid_argument("theta must be docs x topics");
  }
  double total = 0.0;
  for (std::size_t d = 0; d < heldout.docs.size(); ++d) {
    const double* th = theta.data() + d * static_cast<std::size_t>(topics);
    for (long long w : heldout.docs[d]) {
      if (w < 0 || w >= vocab) {
        throw std::invalid_argument("token id " + std::to_string(w) +
                                    " outside the vocabulary of size " + std::to_string(vocab));
      }
      double p = 0.0;
      for (long long k = 0; k < topics; ++k) {
        p += th[k] * phi[static_cast<std::size_t>(k * vocab + w)];
      }
      total += std::log10(p);
    }
  }
  return total;
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("rmse needs vectors of equal length, got " +
                                std::to_string(predictions.size()) + " and " +
                                std::to_string(targets.size()));
  }
  if (predictions.empty()) throw std::invalid_argument("rmse needs at least one point");
  double ss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(predictions.size()));
}

}  // namespace bnmc
