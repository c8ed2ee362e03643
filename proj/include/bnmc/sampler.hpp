#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "bnmc/batch.hpp"
#include "bnmc/eval.hpp"
#include "bnmc/plan.hpp"

namespace bnmc {

struct RunConfig {
  Method method = Method::Gibbs;
  std::uint64_t seed = 0;
  int threads = 1;
  long long thin = 1;
  long long burnin = 0;
  double mh_scale = 0.5;
  std::vector<std::string> observe_extra;  // observed on top of the model's observe()
};

// Values of the unobserved variables, flat, in declaration order.
struct Snapshot {
  std::vector<std::vector<double>> real;     // aligned with Trace::var_ids
  std::vector<std::vector<long long>> ints;
};

struct Trace {
  std::string model;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<int> var_ids;                // unobserved variables, declaration order
  std::vector<std::string> var_names;
  std::vector<Snapshot> samples;           // thinned states
  std::vector<double> log_joint;           // one entry per kept iteration
  Snapshot map_state;
  double map_log_joint = 0.0;
  std::vector<double> timing_ms;           // wall clock per kept iteration
};

// Executes a compiled plan over a parameter store. Owns the parallel pool,
// the bindings and the layouts; the store is borrowed per call.
class Engine {
 public:
  Engine(const CheckedModel& model, const HyperValues& hyper, const RunConfig& cfg);

  const SamplerPlan& plan() const { return plan_; }
  const JointDensity& joint() const { return joint_; }
  const std::vector<VarLayout>& layouts() const { return layouts_; }
  const Bindings& bindings() const { return bind_; }
  ParallelExecutor& pool() { return pool_; }

  // Parallel tree-reduction of the joint; bit-identical across worker counts.
  double eval_log_joint(const ParamStore& store);

  // One full sweep of all plan blocks. Returns the post-sweep log joint;
  // `mh_accepted` reports the last Metropolis block's decision, if any.
  double sweep(ParamStore& store, long long iter, bool* mh_accepted = nullptr);

  // Runs burn-in plus n recorded iterations.
  Trace run(ParamStore& store, long long n);

  ParamStore allocate() const { return allocate_store(model_, layouts_); }
  void validate(const ParamStore& store) const { validate_store(model_, layouts_, store); }

 private:
  void run_conjugate(const Block& b, ParamStore& store, long long iter);
  void run_exact_discrete(const Block& b, ParamStore& store, long long iter);
  void run_mh_block(const Block& b, ParamStore& store, long long iter, bool* accepted);
  void run_mwg_block(const Block& b, ParamStore& store, long long iter);

  EvalCtx ctx(const ParamStore& store) const {
    return EvalCtx{&model_, &bind_, &layouts_, &store, {}, {}};
  }

  const CheckedModel& model_;
  RunConfig cfg_;
  Bindings bind_;
  std::vector<VarLayout> layouts_;
  JointDensity joint_;
  std::vector<char> observed_;
  SamplerPlan plan_;
  ParallelExecutor pool_;
};

// Draws one element of one variable from its declared distribution, given
// the current store (used by prior_init and by the soundness tests).
void draw_element_from_prior(const CheckedModel& model, const Bindings& bind,
                             const std::vector<VarLayout>& layouts, ParamStore& store, int var,
                             long long elem, RngStream& rng);

// Ancestral draw from the model's own generative process, in declaration
// order. Fills every variable, or only unobserved ones when skip_observed is
// set (the usual chain initialization).
void prior_init(const CheckedModel& model, const Bindings& bind,
                const std::vector<VarLayout>& layouts, ParamStore& store, std::uint64_t seed,
                bool skip_observed);

// Runs plan compilation and n sweeps from the given initial store; the store
// is advanced in place and observed variables are never written.
Trace sample(const CheckedModel& model, const HyperValues& hyper, ParamStore& store, long long n,
             const RunConfig& cfg);

// Maximum a posteriori estimate: runs `sample` and overwrites the store's
// unobserved variables with the visited state of highest log joint.
ParamStore& map_estimate(const CheckedModel& model, const std::set<std::string>& observe_extra,
                         const HyperValues& hyper, ParamStore& store, long long n,
                         RunConfig cfg);

}  // namespace bnmc
