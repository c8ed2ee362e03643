#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bnmc/bench.hpp"
#include "bnmc/data.hpp"
#include "bnmc/gen.hpp"
#include "bnmc/parser.hpp"
#include "bnmc/plan.hpp"
#include "bnmc/sampler.hpp"

namespace py = pybind11;
using namespace bnmc;

namespace {

struct ModelHandle {
  CheckedModel model;
  JointDensity joint;
};

ModelHandle parse_handle(const std::string& source, const std::string& name) {
  ModelHandle h{validate_model(parse_model(source), name), {}};
  h.joint = lower(h.model);
  return h;
}

std::string describe_handle(const ModelHandle& h, const std::string& method_name) {
  Method method;
  if (!lookup_method(method_name, &method)) {
    throw std::invalid_argument("unknown method '" + method_name + "'");
  }
  std::vector<char> observed(h.model.vars.size(), 0);
  for (const auto& v : h.model.vars) {
    observed[static_cast<std::size_t>(v.id)] = v.observed_in_model;
  }
  return describe_plan(h.model, h.joint, plan_inference(h.model, h.joint, method, observed));
}

py::dict trace_to_dict(const Trace& t) {
  py::dict out;
  out["model"] = t.model;
  out["method"] = t.method;
  out["seed"] = t.seed;
  py::list samples;
  auto state_to_dict = [&](const Snapshot& s) {
    py::dict state;
    for (std::size_t i = 0; i < t.var_names.size(); ++i) {
      if (!s.ints[i].empty()) {
        state[t.var_names[i].c_str()] = s.ints[i];
      } else {
        state[t.var_names[i].c_str()] = s.real[i];
      }
    }
    return state;
  };
  for (const auto& s : t.samples) samples.append(state_to_dict(s));
  out["samples"] = samples;
  out["log_joint"] = t.log_joint;
  out["map_state"] = state_to_dict(t.map_state);
  out["map_log_joint"] = t.map_log_joint;
  out["timing_ms"] = t.timing_ms;
  return out;
}

py::dict run_infer(const ModelHandle& h, const std::string& data_json,
                   const std::string& method_name, long long samples, std::uint64_t seed,
                   int threads, const std::vector<std::string>& observe, long long thin,
                   long long burnin, double mh_scale) {
  const DataFile data = parse_data(data_json);
  const Bindings bind = make_bindings(h.model, data.hyper);
  const auto layouts = make_layouts(h.model, bind);
  ParamStore store = allocate_store(h.model, layouts);

  RunConfig cfg;
  if (!lookup_method(method_name, &cfg.method)) {
    throw std::invalid_argument("unknown method '" + method_name + "'");
  }
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.thin = thin;
  cfg.burnin = burnin;
  cfg.mh_scale = mh_scale;
  cfg.observe_extra = observe;
  for (const auto& name : observe) {
    const RandomVar* v = h.model.find_var(name);
    if (!v) throw std::invalid_argument("cannot observe unknown variable '" + name + "'");
    store.observed[static_cast<std::size_t>(v->id)] = 1;
  }
  apply_data(h.model, layouts, data, store);
  prior_init(h.model, bind, layouts, store, seed, true);
  return trace_to_dict(sample(h.model, data.hyper, store, samples, cfg));
}

double py_lpp(const std::vector<double>& phi, const std::vector<double>& theta, long long topics,
              long long vocab, const std::vector<std::vector<long long>>& docs) {
  HeldoutCorpus corpus;
  corpus.docs = docs;
  return log_predictive_probability(phi, theta, topics, vocab, corpus);
}

std::string py_gen(const std::string& fixture, long long n, long long k, std::uint64_t seed) {
  if (fixture == "gmm") return serialize_data(gen_gmm(n, {-5.0, 0.0, 5.0}, {0.1, 0.1, 0.1}, seed).data);
  if (fixture == "regression") return serialize_data(gen_regression(n, k, 0.1, seed).data);
  if (fixture == "catmix") return serialize_data(gen_catmix(n, k, 3, seed));
  if (fixture == "hmm") return serialize_data(gen_hmm(n, k, seed));
  if (fixture == "naivebayes") return serialize_data(gen_naivebayes(n, k, seed));
  if (fixture == "polyreg") return serialize_data(gen_polyreg(n, k, seed));
  throw std::invalid_argument("unknown fixture '" + fixture + "'");
}

py::tuple py_gen_lda(long long docs, long long vocab, long long topics, long long doc_len,
                     long long heldout_docs, std::uint64_t seed) {
  const LdaCorpus corpus = gen_lda(docs, vocab, topics, doc_len, heldout_docs, seed);
  return py::make_tuple(serialize_data(corpus.train), serialize_data(corpus.heldout),
                        corpus.true_phi);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian-network model compiler and data-parallel MCMC runtime";

  py::class_<ModelHandle>(m, "Model")
      .def_property_readonly("name", [](const ModelHandle& h) { return h.model.name; })
      .def_property_readonly("variables",
                             [](const ModelHandle& h) {
                               std::vector<std::string> names;
                               for (const auto& v : h.model.vars) names.push_back(v.name);
                               return names;
                             })
      .def_property_readonly("observed",
                             [](const ModelHandle& h) { return h.model.observed; })
      .def("describe", &describe_handle, py::arg("method") = "gibbs")
      .def("__repr__", [](const ModelHandle& h) {
        return "<bnmc.Model '" + h.model.name + "'>";
      });

  m.def("parse", &parse_handle, py::arg("source"), py::arg("name") = "model",
        "Parse and validate a model source text.");
  m.def("infer", &run_infer, py::arg("model"), py::arg("data"), py::arg("method") = "gibbs",
        py::arg("samples") = 100, py::arg("seed") = 0, py::arg("threads") = 1,
        py::arg("observe") = std::vector<std::string>{}, py::arg("thin") = 1,
        py::arg("burnin") = 0, py::arg("mh_scale") = 0.5,
        "Run inference on a JSON data document and return the trace.");
  m.def("log_predictive_probability", &py_lpp, py::arg("phi"), py::arg("theta"),
        py::arg("topics"), py::arg("vocab"), py::arg("docs"));
  m.def("rmse",
        [](const std::vector<double>& pred, const std::vector<double>& target) {
          return rmse(pred, target);
        },
        py::arg("predictions"), py::arg("targets"));
  m.def("generate", &py_gen, py::arg("fixture"), py::arg("n") = 1000, py::arg("k") = 3,
        py::arg("seed") = 1, "Synthetic data for a fixture, as a JSON document.");
  m.def("generate_lda", &py_gen_lda, py::arg("docs") = 200, py::arg("vocab") = 500,
        py::arg("topics") = 10, py::arg("doc_len") = 100, py::arg("heldout_docs") = 20,
        py::arg("seed") = 1, "LDA corpus: (train_json, heldout_json, true_phi).");
}
