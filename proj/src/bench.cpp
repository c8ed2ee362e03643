#include "bnmc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

#include "bnmc/data.hpp"
#include "bnmc/parser.hpp"

namespace bnmc {

namespace {

int var_position(const Trace& t, const std::string& name) {
  for (std::size_t i = 0; i < t.var_names.size(); ++i) {
    if (t.var_names[i] == name) return static_cast<int>(i);
  }
  throw RuntimeError("trace does not carry variable '" + name + "'");
}

long long hyper_int(const DataFile& d, const std::string& name) {
  auto it = d.hyper.values.find(name);
  if (it == d.hyper.values.end()) throw RuntimeError("missing hyperparameter '" + name + "'");
  return std::get<long long>(it->second);
}

}  // namespace

std::vector<LppPoint> lpp_curve(const CheckedModel& model, const Trace& train_trace,
                                const DataFile& heldout, const HeldoutCorpus& heldout_docs,
                                long long fit_sweeps, std::uint64_t seed, int threads) {
  const int phi_pos = var_position(train_trace, "phi");
  const long long topics = hyper_int(heldout, "K");
  const long long vocab = hyper_int(heldout, "V");

  std::vector<long long> checkpoints;
  for (long long c = 1; c <= static_cast<long long>(train_trace.samples.size()); c *= 2) {
    checkpoints.push_back(c);
  }
  if (checkpoints.empty() ||
      checkpoints.back() != static_cast<long long>(train_trace.samples.size())) {
    checkpoints.push_back(static_cast<long long>(train_trace.samples.size()));
  }

  const Bindings bind = make_bindings(model, heldout.hyper);
  const auto layouts = make_layouts(model, bind);

  std::vector<LppPoint> out;
  for (long long c : checkpoints) {
    const auto& phi = train_trace.samples[static_cast<std::size_t>(c - 1)]
                          .real[static_cast<std::size_t>(phi_pos)];

    ParamStore store = allocate_store(model, layouts);
    apply_data(model, layouts, heldout, store);
    store.real[static_cast<std::size_t>(model.find_var("phi")->id)] = phi;
    store.observed[static_cast<std::size_t>(model.find_var("phi")->id)] = 1;
    prior_init(model, bind, layouts, store, seed + static_cast<std::uint64_t>(c), true);

    RunConfig cfg;
    cfg.method = Method::Gibbs;
    cfg.seed = seed + static_cast<std::uint64_t>(c);
    cfg.threads = threads;
    map_estimate(model, {"phi"}, heldout.hyper, store, fit_sweeps, cfg);

    const auto& theta = store.real[static_cast<std::size_t>(model.find_var("theta")->id)];
    LppPoint p;
    p.samples = c;
    p.lpp = log_predictive_probability(phi, theta, topics, vocab, heldout_docs);
    p.seconds = 0.0;
    for (long long i = 0; i < c && i < static_cast<long long>(train_trace.timing_ms.size()); ++i) {
      p.seconds += train_trace.timing_ms[static_cast<std::size_t>(i)] / 1000.0;
    }
    out.push_back(p);
  }
  return out;
}

double regression_rmse_once(const CheckedModel& model, const DataFile& full, double test_frac,
                            long long samples, std::uint64_t split_seed, std::uint64_t chain_seed,
                            double mh_scale, int threads) {
  const long long n = hyper_int(full, "N");
  const long long k = hyper_int(full, "K");
  const auto& x = full.real_arrays.at("x");
  const auto& y = full.real_arrays.at("y");

  // Deterministic shuffled split.
  std::vector<long long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  RngStream rng = RngStream::keyed(split_seed, 0x5717);
  for (long long i = n - 1; i > 0; --i) {
    const long long j = static_cast<long long>(rng.next_unit() * static_cast<double>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const long long test_n = std::max<long long>(1, static_cast<long long>(test_frac * n));
  const long long train_n = n - test_n;

  DataFile train = full;
  std::vector<double> xt, yt, xs, ys;
  for (long long i = 0; i < n; ++i) {
    const long long src = order[static_cast<std::size_t>(i)];
    auto& dst_x = i < train_n ? xt : xs;
    auto& dst_y = i < train_n ? yt : ys;
    for (long long j = 0; j < k; ++j) dst_x.push_back(x[static_cast<std::size_t>(src * k + j)]);
    dst_y.push_back(y[static_cast<std::size_t>(src)]);
  }
  train.hyper.set_int("N", train_n);
  train.real_arrays["x"] = std::move(xt);
  train.real_arrays["y"] = std::move(yt);

  const Bindings bind = make_bindings(model, train.hyper);
  const auto layouts = make_layouts(model, bind);
  ParamStore store = allocate_store(model, layouts);
  apply_data(model, layouts, train, store);
  // Start the walk from the prior mean rather than a prior draw: weights 0.
  RunConfig cfg;
  cfg.method = Method::MH;
  cfg.seed = chain_seed;
  cfg.threads = threads;
  cfg.mh_scale = mh_scale;
  store.real[static_cast<std::size_t>(model.find_var("tau")->id)][0] = 1.0;
  const Trace t = sample(model, train.hyper, store, samples, cfg);

  // Posterior means over the second half of the trace.
  const std::size_t half = t.samples.size() / 2;
  std::vector<double> w_mean(static_cast<std::size_t>(k), 0.0);
  double b_mean = 0.0;
  const int w_pos = var_position(t, "w");
  const int b_pos = var_position(t, "b");
  for (std::size_t s = half; s < t.samples.size(); ++s) {
    for (long long j = 0; j < k; ++j) {
      w_mean[static_cast<std::size_t>(j)] +=
          t.samples[s].real[static_cast<std::size_t>(w_pos)][static_cast<std::size_t>(j)];
    }
    b_mean += t.samples[s].real[static_cast<std::size_t>(b_pos)][0];
  }
  const double count = static_cast<double>(t.samples.size() - half);
  for (auto& w : w_mean) w /= count;
  b_mean /= count;

  std::vector<double> pred(static_cast<std::size_t>(test_n), 0.0);
  for (long long i = 0; i < test_n; ++i) {
    double v = b_mean;
    for (long long j = 0; j < k; ++j) {
      v += w_mean[static_cast<std::size_t>(j)] * xs[static_cast<std::size_t>(i * k + j)];
    }
    pred[static_cast<std::size_t>(i)] = v;
  }
  return rmse(pred, ys);
}

double regression_split_rmse(const CheckedModel& model, const DataFile& full, int splits,
                             long long samples, std::uint64_t seed, double mh_scale, int threads) {
  double total = 0.0;
  for (int s = 0; s < splits; ++s) {
    total += regression_rmse_once(model, full, 0.1, samples, seed + static_cast<std::uint64_t>(s),
                                  seed + 1000 + static_cast<std::uint64_t>(s), mh_scale, threads);
  }
  return total / static_cast<double>(splits);
}

namespace {

// Embedded copies of the two fixture models the bench subcommand sizes up;
// keeps `bnmc bench` independent of the working directory.
constexpr const char* kGmmSource = R"(
model(N: int, K: int) {
  alpha = vector(K, 0.1)
  pi = Dirichlet(K, alpha).sample()
  mu = Gaussian(0.0, 10.0).sample(K)
  sigma2 = InverseGamma(1.0, 1.0).sample(K)
  for (i in 1..N) {
    z = Categorical(K, pi).sample()
    x = Gaussian(mu(z), sigma2(z)).sample()
  }
  observe(x)
}
)";

constexpr const char* kLdaSource = R"(
model(K: int, V: int, M: int, N: int[]) {
  alpha = vector(K, 0.1)
  beta = vector(V, 0.1)
  phi = Dirichlet(V, beta).sample(K)
  theta = Dirichlet(K, alpha).sample(M)
  for (i in 1..M) {
    for (j in 1..N(i)) {
      z = Categorical(K, theta(i)).sample()
      w = Categorical(V, phi(z)).sample()
    }
  }
  observe(w)
}
)";

double run_timed(const CheckedModel& model, const DataFile& data, Method method,
                 long long samples, std::uint64_t seed, int threads) {
  const Bindings bind = make_bindings(model, data.hyper);
  const auto layouts = make_layouts(model, bind);
  ParamStore store = allocate_store(model, layouts);
  apply_data(model, layouts, data, store);
  prior_init(model, bind, layouts, store, seed, true);
  RunConfig cfg;
  cfg.method = method;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.thin = samples;  // keep the trace light
  const auto t0 = std::chrono::steady_clock::now();
  sample(model, data.hyper, store, samples, cfg);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

std::vector<BenchPoint> bench_gmm_sizes(const std::vector<long long>& sizes, long long samples,
                                        std::uint64_t seed, int threads) {
  std::vector<BenchPoint> out;
  for (long long n : sizes) {
    const GmmTruth truth = gen_gmm(n, {-5.0, 0.0, 5.0}, {0.1, 0.1, 0.1}, seed);
    const CheckedModel model = validate_model(parse_model(kGmmSource), "gmm");
    const double secs = run_timed(model, truth.data, Method::Gibbs, samples, seed, threads);
    out.push_back({static_cast<double>(n), secs / static_cast<double>(samples), secs});
  }
  return out;
}

std::vector<BenchPoint> bench_lda_topics(const std::vector<long long>& topics, long long docs,
                                         long long vocab, long long doc_len, long long samples,
                                         std::uint64_t seed, int threads) {
  std::vector<BenchPoint> out;
  for (long long k : topics) {
    const LdaCorpus corpus = gen_lda(docs, vocab, k, doc_len, 1, seed);
    const CheckedModel model = validate_model(parse_model(kLdaSource), "lda");
    const double secs = run_timed(model, corpus.train, Method::Gibbs, samples, seed, threads);
    out.push_back({static_cast<double>(k), secs / static_cast<double>(samples), secs});
  }
  return out;
}

std::string bench_csv(const std::vector<BenchPoint>& points) {
  std::ostringstream os;
  os << "x,value,seconds\n";
  os.precision(10);
  for (const auto& p : points) os << p.x << "," << p.value << "," << p.seconds << "\n";
  return os.str();
}

}  // namespace bnmc
