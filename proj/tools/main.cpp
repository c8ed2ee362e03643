#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "bnmc/bench.hpp"
#include "bnmc/data.hpp"
#include "bnmc/gen.hpp"
#include "bnmc/parser.hpp"
#include "bnmc/plan.hpp"
#include "bnmc/sampler.hpp"

namespace {

using namespace bnmc;

std::string model_name_of(const std::string& path) {
  std::string stem = path;
  if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos) {
    stem = stem.substr(slash + 1);
  }
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos) {
    stem = stem.substr(0, dot);
  }
  return stem;
}

CheckedModel load_model(const std::string& path) {
  return validate_model(parse_model(read_text_file(path)), model_name_of(path));
}

Method parse_method(const std::string& name) {
  Method m;
  if (!lookup_method(name, &m)) {
    throw RuntimeError("unknown method '" + name + "'");
  }
  return m;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream is(csv);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<long long> split_csv_ints(const std::string& csv) {
  std::vector<long long> out;
  for (const auto& s : split_csv(csv)) out.push_back(std::stoll(s));
  return out;
}

struct InferArgs {
  std::string model_path, data_path, out_path, method = "gibbs";
  long long samples = 100, thin = 1, burnin = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  double mh_scale = 0.5;
  std::string observe, metric = "none", heldout_path, metric_out;
  long long fit_sweeps = 50;
  bool omit_timing = false;
};

int run_infer(const InferArgs& a) {
  const CheckedModel model = load_model(a.model_path);
  const DataFile data = load_data(a.data_path);
  const Bindings bind = make_bindings(model, data.hyper);
  const auto layouts = make_layouts(model, bind);
  ParamStore store = allocate_store(model, layouts);

  RunConfig cfg;
  cfg.method = parse_method(a.method);
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.thin = a.thin;
  cfg.burnin = a.burnin;
  cfg.mh_scale = a.mh_scale;
  cfg.observe_extra = split_csv(a.observe);

  // Call-time observations freeze before loading, so the loader can insist
  // on their values being present.
  for (const auto& name : cfg.observe_extra) {
    const RandomVar* v = model.find_var(name);
    if (!v) throw RuntimeError("cannot observe unknown variable '" + name + "'");
    store.observed[static_cast<std::size_t>(v->id)] = 1;
  }
  apply_data(model, layouts, data, store);
  prior_init(model, bind, layouts, store, a.seed, /*skip_observed=*/true);

  Trace trace = sample(model, data.hyper, store, a.samples, cfg);
  if (a.omit_timing) trace.timing_ms.clear();
  if (!a.out_path.empty()) save_trace(trace, a.out_path);

  double total_ms = 0.0;
  for (double ms : trace.timing_ms) total_ms += ms;
  std::cout << "model: " << model.name << "\nmethod: " << a.method << "\nseed: " << a.seed
            << "\nsamples: " << trace.log_joint.size() << "\nmap_log_joint: "
            << trace.map_log_joint << "\ntotal_seconds: " << total_ms / 1000.0 << "\n";

  if (a.metric == "lpp") {
    if (a.heldout_path.empty()) throw RuntimeError("--metric lpp needs --heldout");
    const DataFile heldout = load_data(a.heldout_path);
    HeldoutCorpus docs;
    {
      const auto& w = heldout.int_arrays.at("w");
      const auto& lengths = std::get<std::vector<long long>>(heldout.hyper.values.at("N"));
      std::size_t off = 0;
      for (long long len : lengths) {
        docs.docs.emplace_back(w.begin() + static_cast<long long>(off),
                               w.begin() + static_cast<long long>(off) + len);
        off += static_cast<std::size_t>(len);
      }
    }
    const auto curve = lpp_curve(model, trace, heldout, docs, a.fit_sweeps, a.seed + 1, a.threads);
    std::ostringstream csv;
    csv << "x,value,seconds\n";
    csv.precision(10);
    for (const auto& p : curve) csv << p.samples << "," << p.lpp << "," << p.seconds << "\n";
    if (a.metric_out.empty()) {
      std::cout << csv.str();
    } else {
      write_text_file(a.metric_out, csv.str());
    }
  } else if (a.metric == "rmse") {
    if (a.heldout_path.empty()) throw RuntimeError("--metric rmse needs --heldout");
    const DataFile test = load_data(a.heldout_path);
    const auto& xs = test.real_arrays.at("x");
    const auto& ys = test.real_arrays.at("y");
    const long long k = std::get<long long>(data.hyper.values.at("K"));
    int w_pos = -1, b_pos = -1;
    for (std::size_t i = 0; i < trace.var_names.size(); ++i) {
      if (trace.var_names[i] == "w") w_pos = static_cast<int>(i);
      if (trace.var_names[i] == "b") b_pos = static_cast<int>(i);
    }
    if (w_pos < 0 || b_pos < 0) throw RuntimeError("--metric rmse expects variables w and b");
    std::vector<double> w_mean(static_cast<std::size_t>(k), 0.0);
    double b_mean = 0.0;
    const std::size_t half = trace.samples.size() / 2;
    for (std::size_t s = half; s < trace.samples.size(); ++s) {
      for (long long j = 0; j < k; ++j) {
        w_mean[static_cast<std::size_t>(j)] +=
            trace.samples[s].real[static_cast<std::size_t>(w_pos)][static_cast<std::size_t>(j)];
      }
      b_mean += trace.samples[s].real[static_cast<std::size_t>(b_pos)][0];
    }
    const double count = static_cast<double>(trace.samples.size() - half);
    for (auto& w : w_mean) w /= count;
    b_mean /= count;
    std::vector<double> pred(ys.size(), 0.0);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double v = b_mean;
      for (long long j = 0; j < k; ++j) {
        v += w_mean[static_cast<std::size_t>(j)] *
             xs[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)];
      }
      pred[i] = v;
    }
    const double value = rmse(pred, ys);
    std::ostringstream csv;
    csv << "x,value,seconds\n";
    csv.precision(10);
    csv << a.samples << "," << value << "," << total_ms / 1000.0 << "\n";
    if (a.metric_out.empty()) {
      std::cout << csv.str();
    } else {
      write_text_file(a.metric_out, csv.str());
    }
  } else if (a.metric != "none") {
    throw RuntimeError("unknown metric '" + a.metric + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian-network model compiler and data-parallel MCMC runtime"};
  app.require_subcommand(1);

  auto* describe = app.add_subcommand("describe", "print derived conditionals and strategies");
  std::string d_model, d_method = "gibbs";
  describe->add_option("--model", d_model, "model file (.bn)")->required();
  describe->add_option("--method", d_method, "mh, gibbs or mwg");

  auto* infer = app.add_subcommand("infer", "run inference and write a trace");
  InferArgs ia;
  infer->add_option("--model", ia.model_path, "model file (.bn)")->required();
  infer->add_option("--data", ia.data_path, "data JSON")->required();
  infer->add_option("--method", ia.method, "mh, gibbs or mwg");
  infer->add_option("--samples", ia.samples, "number of samples");
  infer->add_option("--seed", ia.seed, "random seed");
  infer->add_option("--threads", ia.threads, "worker count");
  infer->add_option("--observe", ia.observe, "extra observed variables (CSV)");
  infer->add_option("--thin", ia.thin, "keep every n-th state");
  infer->add_option("--burnin", ia.burnin, "discarded leading sweeps");
  infer->add_option("--mh-scale", ia.mh_scale, "random-walk proposal scale");
  infer->add_option("--out", ia.out_path, "trace output path");
  infer->add_option("--metric", ia.metric, "lpp, rmse or none");
  infer->add_option("--heldout", ia.heldout_path, "held-out data for the metric");
  infer->add_option("--metric-out", ia.metric_out, "metric CSV path (stdout otherwise)");
  infer->add_option("--fit-sweeps", ia.fit_sweeps, "held-out fitting sweeps for lpp");
  infer->add_flag("--omit-timing", ia.omit_timing, "drop wall-clock values from the trace");

  auto* gen = app.add_subcommand("gen", "generate synthetic data for a fixture");
  std::string g_fixture, g_out, g_heldout_out, g_text;
  std::uint64_t g_seed = 1;
  long long g_n = 1000, g_k = 3, g_vocab = 500, g_docs = 200, g_doclen = 100, g_heldout = 20,
            g_order = 3, g_states = 2;
  double g_noise = 0.1;
  gen->add_option("--fixture", g_fixture, "lda, gmm, regression, catmix, hmm, naivebayes, polyreg")
      ->required();
  gen->add_option("--out", g_out, "output JSON path")->required();
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--n", g_n, "data size");
  gen->add_option("--k", g_k, "clusters / features / weights / topics");
  gen->add_option("--vocab", g_vocab, "vocabulary size (lda, catmix)");
  gen->add_option("--docs", g_docs, "documents (lda)");
  gen->add_option("--doc-len", g_doclen, "tokens per document (lda)");
  gen->add_option("--heldout-docs", g_heldout, "held-out documents (lda)");
  gen->add_option("--heldout-out", g_heldout_out, "held-out corpus path (lda)");
  gen->add_option("--order", g_order, "polynomial order (polyreg)");
  gen->add_option("--states", g_states, "states (hmm)");
  gen->add_option("--noise", g_noise, "noise variance (regression)");
  gen->add_option("--from-text", g_text, "build an lda corpus from a text file");

  auto* bench = app.add_subcommand("bench", "timing series over sizes or topic counts");
  std::string b_fixture, b_sizes, b_topics, b_out;
  long long b_samples = 50;
  std::uint64_t b_seed = 1;
  int b_threads = 1;
  bench->add_option("--fixture", b_fixture, "gmm or lda")->required();
  bench->add_option("--sizes", b_sizes, "CSV of data sizes (gmm)");
  bench->add_option("--topics", b_topics, "CSV of topic counts (lda)");
  bench->add_option("--samples", b_samples, "samples per point");
  bench->add_option("--seed", b_seed, "seed");
  bench->add_option("--threads", b_threads, "worker count");
  bench->add_option("--out", b_out, "CSV output path (stdout otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (describe->parsed()) {
      const CheckedModel model = load_model(d_model);
      const JointDensity joint = lower(model);
      std::vector<char> observed(model.vars.size(), 0);
      for (const auto& v : model.vars) {
        observed[static_cast<std::size_t>(v.id)] = v.observed_in_model;
      }
      const SamplerPlan plan = plan_inference(model, joint, parse_method(d_method), observed);
      std::cout << describe_plan(model, joint, plan);
      return 0;
    }
    if (infer->parsed()) return run_infer(ia);
    if (gen->parsed()) {
      if (g_fixture == "lda") {
        if (!g_text.empty()) {
          save_data(corpus_from_text(read_text_file(g_text)), g_out);
        } else {
          const LdaCorpus corpus = gen_lda(g_docs, g_vocab, g_k, g_doclen, g_heldout, g_seed);
          save_data(corpus.train, g_out);
          if (!g_heldout_out.empty()) save_data(corpus.heldout, g_heldout_out);
        }
      } else if (g_fixture == "gmm") {
        save_data(gen_gmm(g_n, {-5.0, 0.0, 5.0}, {0.1, 0.1, 0.1}, g_seed).data, g_out);
      } else if (g_fixture == "regression") {
        save_data(gen_regression(g_n, g_k, g_noise, g_seed).data, g_out);
      } else if (g_fixture == "catmix") {
        save_data(gen_catmix(g_n, g_k, g_vocab, g_seed), g_out);
      } else if (g_fixture == "hmm") {
        save_data(gen_hmm(g_n, g_states, g_seed), g_out);
      } else if (g_fixture == "naivebayes") {
        save_data(gen_naivebayes(g_n, g_k, g_seed), g_out);
      } else if (g_fixture == "polyreg") {
        save_data(gen_polyreg(g_n, g_order, g_seed), g_out);
      } else {
        std::cerr << "unknown fixture '" << g_fixture << "'\n";
        return 1;
      }
      return 0;
    }
    if (bench->parsed()) {
      std::vector<BenchPoint> points;
      if (b_fixture == "gmm") {
        points = bench_gmm_sizes(split_csv_ints(b_sizes), b_samples, b_seed, b_threads);
      } else if (b_fixture == "lda") {
        points = bench_lda_topics(split_csv_ints(b_topics), 50, 120, 40, b_samples, b_seed,
                                  b_threads);
      } else {
        std::cerr << "unknown fixture '" << b_fixture << "'\n";
        return 1;
      }
      const std::string csv = bench_csv(points);
      if (b_out.empty()) {
        std::cout << csv;
      } else {
        write_text_file(b_out, csv);
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const CheckError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
