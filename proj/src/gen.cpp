#include "bnmc/gen.hpp"

#include <map>
#include <sstream>

#include "bnmc/dist.hpp"

namespace bnmc {

namespace {

std::vector<double> dirichlet_row(RngStream& rng, long long dim, double conc) {
  std::vector<double> alpha(static_cast<std::size_t>(dim), conc);
  std::vector<double> out(static_cast<std::size_t>(dim));
  draw_dirichlet(rng, alpha, out);
  return out;
}

}  // namespace

LdaCorpus gen_lda(long long docs, long long vocab, long long topics, long long doc_len,
                  long long heldout_docs, std::uint64_t seed) {
  LdaCorpus corpus;
  RngStream rng = RngStream::keyed(seed, 0xDA7A);

  // Concentrated topics so the corpus carries recoverable structure.
  corpus.true_phi.reserve(static_cast<std::size_t>(topics * vocab));
  for (long long k = 0; k < topics; ++k) {
    const std::vector<double> row = dirichlet_row(rng, vocab, 0.05);
    corpus.true_phi.insert(corpus.true_phi.end(), row.begin(), row.end());
  }

  auto emit = [&](long long ndocs, DataFile& out, HeldoutCorpus* tokens) {
    std::vector<long long> lengths(static_cast<std::size_t>(ndocs), doc_len);
    std::vector<long long> w;
    w.reserve(static_cast<std::size_t>(ndocs * doc_len));
    for (long long d = 0; d < ndocs; ++d) {
      const std::vector<double> theta = dirichlet_row(rng, topics, 0.3);
      std::vector<long long> doc;
      for (long long j = 0; j < doc_len; ++j) {
        const long long z = draw_categorical(rng, theta);
        const std::span<const double> row{corpus.true_phi.data() + z * vocab,
                                          static_cast<std::size_t>(vocab)};
        const long long token = draw_categorical(rng, row);
        w.push_back(token);
        doc.push_back(token);
      }
      if (tokens) tokens->docs.push_back(std::move(doc));
    }
    out.hyper.set_int("K", topics);
    out.hyper.set_int("V", vocab);
    out.hyper.set_int("M", ndocs);
    out.hyper.set_array("N", std::move(lengths));
    out.int_arrays["w"] = std::move(w);
  };

  emit(docs, corpus.train, nullptr);
  emit(heldout_docs, corpus.heldout, &corpus.heldout_docs);
  return corpus;
}

RegressionTruth gen_regression(long long n, long long k, double noise_var, std::uint64_t seed) {
  RegressionTruth truth;
  RngStream rng = RngStream::keyed(seed, 0x4E6);
  truth.noise_var = noise_var;
  // Small true weights keep the random-walk chain's burn-in short.
  for (long long j = 0; j < k; ++j) truth.w.push_back(0.3 * rng.next_gaussian());
  truth.b = 0.3 * rng.next_gaussian();

  const double lo = -1.0, hi = 1.0;
  std::vector<double> x, y;
  for (long long i = 0; i < n; ++i) {
    double mean = truth.b;
    for (long long j = 0; j < k; ++j) {
      const double xij = draw_uniform(rng, lo, hi);
      x.push_back(xij);
      mean += truth.w[static_cast<std::size_t>(j)] * xij;
    }
    y.push_back(mean + std::sqrt(noise_var) * rng.next_gaussian());
  }
  truth.data.hyper.set_int("K", k);
  truth.data.hyper.set_int("N", n);
  truth.data.hyper.set_real("l", lo);
  truth.data.hyper.set_real("u", hi);
  truth.data.real_arrays["x"] = std::move(x);
  truth.data.real_arrays["y"] = std::move(y);
  return truth;
}

GmmTruth gen_gmm(long long n, std::vector<double> centers, std::vector<double> stds,
                 std::uint64_t seed) {
  GmmTruth truth;
  truth.centers = centers;
  truth.stds = stds;
  RngStream rng = RngStream::keyed(seed, 0x6A55);
  const long long k = static_cast<long long>(centers.size());
  std::vector<double> x;
  for (long long i = 0; i < n; ++i) {
    const long long z = static_cast<long long>(rng.next_unit() * static_cast<double>(k));
    x.push_back(centers[static_cast<std::size_t>(z)] +
                stds[static_cast<std::size_t>(z)] * rng.next_gaussian());
  }
  truth.data.hyper.set_int("N", n);
  truth.data.hyper.set_int("K", k);
  truth.data.real_arrays["x"] = std::move(x);
  return truth;
}

DataFile gen_catmix(long long n, long long clusters, long long vocab, std::uint64_t seed) {
  DataFile d;
  RngStream rng = RngStream::keyed(seed, 0xCA7);
  const std::vector<double> phi = dirichlet_row(rng, clusters, 0.8);
  std::vector<std::vector<double>> theta;
  for (long long c = 0; c < clusters; ++c) theta.push_back(dirichlet_row(rng, vocab, 0.5));
  std::vector<long long> x;
  for (long long i = 0; i < n; ++i) {
    const long long z = draw_categorical(rng, phi);
    x.push_back(draw_categorical(rng, theta[static_cast<std::size_t>(z)]));
  }
  d.hyper.set_int("N", n);
  d.hyper.set_int("K", clusters);
  d.hyper.set_int("V", vocab);
  d.int_arrays["x"] = std::move(x);
  return d;
}

DataFile gen_hmm(long long n, long long states, std::uint64_t seed) {
  DataFile d;
  RngStream rng = RngStream::keyed(seed, 0x44);
  std::vector<std::vector<double>> rows;
  for (long long s = 0; s < states; ++s) rows.push_back(dirichlet_row(rng, states, 0.4));
  std::vector<double> bias;
  for (long long s = 0; s < states; ++s) bias.push_back(0.15 + 0.7 * rng.next_unit());
  std::vector<long long> flips;
  long long state = 0;
  for (long long t = 0; t < n; ++t) {
    state = draw_categorical(rng, rows[static_cast<std::size_t>(state)]);
    flips.push_back(draw_bernoulli(rng, bias[static_cast<std::size_t>(state)]));
  }
  d.hyper.set_int("N", n);
  d.hyper.set_int("S", states);
  d.int_arrays["flips"] = std::move(flips);
  return d;
}

DataFile gen_naivebayes(long long n, long long features, std::uint64_t seed) {
  DataFile d;
  RngStream rng = RngStream::keyed(seed, 0xB17E5);
  const double p_class = 0.4;
  std::vector<double> p_feat;
  for (long long j = 0; j < 2 * features; ++j) p_feat.push_back(0.1 + 0.8 * rng.next_unit());
  std::vector<long long> c, f;
  for (long long i = 0; i < n; ++i) {
    const long long ci = draw_bernoulli(rng, p_class);
    c.push_back(ci);
    for (long long j = 0; j < features; ++j) {
      f.push_back(draw_bernoulli(rng, p_feat[static_cast<std::size_t>(j * 2 + ci)]));
    }
  }
  d.hyper.set_int("N", n);
  d.hyper.set_int("K", features);
  d.int_arrays["c"] = std::move(c);
  d.int_arrays["f"] = std::move(f);
  return d;
}

DataFile gen_polyreg(long long n, long long order, std::uint64_t seed) {
  DataFile d;
  RngStream rng = RngStream::keyed(seed, 0x90);
  std::vector<double> w;
  for (long long j = 0; j < order; ++j) w.push_back(0.5 * rng.next_gaussian());
  const double bias = 0.5 * rng.next_gaussian();
  std::vector<double> x, y;
  for (long long i = 0; i < n; ++i) {
    const double xi = draw_uniform(rng, 0.0, 2.0);
    x.push_back(xi);
    double mean = bias;
    double p = 1.0;
    for (long long j = 0; j < order; ++j) {
      p *= xi;
      mean += w[static_cast<std::size_t>(j)] * p;
    }
    y.push_back(mean + rng.next_gaussian());
  }
  d.hyper.set_int("N", n);
  d.hyper.set_int("M", order);
  d.real_arrays["x"] = std::move(x);
  d.real_arrays["y"] = std::move(y);
  return d;
}

DataFile corpus_from_text(const std::string& text) {
  DataFile d;
  std::map<std::string, long long> vocab;
  std::vector<long long> lengths, w;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream words(line);
    std::string word;
    long long len = 0;
    while (words >> word) {
      auto it = vocab.insert({word, static_cast<long long>(vocab.size())}).first;
      w.push_back(it->second);
      ++len;
    }
    if (len > 0) lengths.push_back(len);
  }
  d.hyper.set_int("M", static_cast<long long>(lengths.size()));
  d.hyper.set_int("V", static_cast<long long>(vocab.size()));
  d.hyper.set_array("N", std::move(lengths));
  d.int_arrays["w"] = std::move(w);
  return d;
}

}  // namespace bnmc
