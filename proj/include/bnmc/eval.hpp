#pragma once

#include "bnmc/density.hpp"
#include "bnmc/executor.hpp"
#include "bnmc/store.hpp"

namespace bnmc {

// Temporary replacement of one element's value during evaluation, used to
// score candidate values without writing the store.
struct Override {
  int var = -1;
  long long flat = -1;
  double dval = 0.0;
  long long ival = 0;
};

struct EvalCtx {
  const CheckedModel* model;
  const Bindings* bind;
  const std::vector<VarLayout>* layouts;
  const ParamStore* store;
  Override ov;

  struct IndexBinding {
    std::string_view name;
    long long value;
  };
  std::vector<IndexBinding> indices;

  void push_index(std::string_view name, long long v) { indices.push_back({name, v}); }
  void pop_index() { indices.pop_back(); }
  long long lookup_index(std::string_view name) const;
};

double eval_expr(const ExprPtr& e, EvalCtx& ctx);
long long eval_index(const ExprPtr& e, EvalCtx& ctx);
bool eval_pred(const Pred& p, EvalCtx& ctx);

// Log value of a density term at the store's current point. Out-of-support
// atoms contribute -inf; Integral nodes are a plan-compilation bug and throw.
double eval_density(const DensityPtr& d, EvalCtx& ctx);

// Same value as eval_density, with top-level indexed products evaluated by
// deterministic parallel reduction; bit-identical across worker counts.
double eval_density_parallel(const DensityPtr& d, const EvalCtx& base, ParallelExecutor& pool);

}  // namespace bnmc
