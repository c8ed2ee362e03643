#include "bnmc/eval.hpp"

#include <cmath>
#include <functional>

namespace bnmc {

// --- bindings and layouts ----------------------------------------------------

Bindings make_bindings(const CheckedModel& model, const HyperValues& hyper) {
  Bindings b;
  b.model = &model;
  b.hyper_int.resize(model.hypers.size(), 0);
  b.hyper_real.resize(model.hypers.size(), 0.0);
  b.hyper_arr.resize(model.hypers.size());
  for (std::size_t i = 0; i < model.hypers.size(); ++i) {
    const auto& h = model.hypers[i];
    auto it = hyper.values.find(h.name);
    if (it == hyper.values.end()) {
      throw RuntimeError("missing hyperparameter '" + h.name + "'");
    }
    switch (h.type) {
      case HyperType::Int:
        if (const auto* v = std::get_if<long long>(&it->second)) {
          b.hyper_int[i] = *v;
        } else {
          throw RuntimeError("hyperparameter '" + h.name + "' must be an integer");
        }
        break;
      case HyperType::Real:
        if (const auto* v = std::get_if<double>(&it->second)) {
          b.hyper_real[i] = *v;
        } else if (const auto* iv = std::get_if<long long>(&it->second)) {
          b.hyper_real[i] = static_cast<double>(*iv);
        } else {
          throw RuntimeError("hyperparameter '" + h.name + "' must be a real");
        }
        break;
      case HyperType::IntArray:
        if (const auto* v = std::get_if<std::vector<long long>>(&it->second)) {
          b.hyper_arr[i] = *v;
        } else {
          throw RuntimeError("hyperparameter '" + h.name + "' must be an integer array");
        }
        break;
    }
  }

  // Deterministic declarations, in order (later ones may reference earlier).
  EvalCtx ctx{&model, &b, nullptr, nullptr, {}, {}};
  b.det_scalar.resize(model.dets.size(), 0.0);
  b.det_vec.resize(model.dets.size());
  for (const auto& d : model.dets) {
    if (d.is_vector) {
      const long long n = eval_index(d.len, ctx);
      if (n < 0) throw RuntimeError("vector '" + d.name + "' has negative length");
      const double fill = eval_expr(d.fill, ctx);
      b.det_vec[static_cast<std::size_t>(d.id)].assign(static_cast<std::size_t>(n), fill);
    } else {
      b.det_scalar[static_cast<std::size_t>(d.id)] = eval_expr(d.value, ctx);
    }
  }
  return b;
}

void VarLayout::unflatten(long long flat, long long out[2]) const {
  if (levels <= 1) {
    out[0] = flat;
    out[1] = 0;
    return;
  }
  if (uniform1 >= 0) {
    out[0] = flat / uniform1;
    out[1] = flat % uniform1;
    return;
  }
  // Ragged: binary search the prefix sums.
  std::size_t lo = 0, hi = offsets.size() - 1;
  while (lo + 1 < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (offsets[mid] <= flat) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out[0] = static_cast<long long>(lo);
  out[1] = flat - offsets[lo];
}

std::vector<VarLayout> make_layouts(const CheckedModel& model, const Bindings& bind) {
  std::vector<VarLayout> layouts;
  layouts.reserve(model.vars.size());
  EvalCtx ctx{&model, &bind, nullptr, nullptr, {}, {}};
  for (const auto& v : model.vars) {
    VarLayout l;
    l.levels = static_cast<int>(v.plates.size());
    if (l.levels >= 1) {
      l.count0 = eval_index(v.plates[0].count, ctx);
      if (l.count0 < 0) throw RuntimeError("negative plate bound for '" + v.name + "'");
      l.total = l.count0;
    }
    if (l.levels == 2) {
      const auto& inner = v.plates[1];
      // Uniform when the inner bound ignores the outer index.
      bool uniform = true;
      std::function<void(const ExprPtr&)> scan = [&](const ExprPtr& e) {
        if (!e) return;
        if (e->kind == ExKind::BoundIndex && e->name == v.plates[0].index) uniform = false;
        for (const auto& k : e->kids) scan(k);
      };
      scan(inner.count);
      if (uniform) {
        l.uniform1 = eval_index(inner.count, ctx);
        if (l.uniform1 < 0) throw RuntimeError("negative plate bound for '" + v.name + "'");
        l.total = l.count0 * l.uniform1;
      } else {
        l.offsets.resize(static_cast<std::size_t>(l.count0) + 1, 0);
        for (long long i = 0; i < l.count0; ++i) {
          ctx.push_index(v.plates[0].index, i);
          const long long n = eval_index(inner.count, ctx);
          ctx.pop_index();
          if (n < 0) throw RuntimeError("negative ragged length for '" + v.name + "'");
          l.offsets[static_cast<std::size_t>(i) + 1] = l.offsets[static_cast<std::size_t>(i)] + n;
        }
        l.total = l.offsets.back();
      }
    }
    if (v.vector_elem) {
      l.width = eval_index(v.elem_dim, ctx);
      if (l.width < 1) throw RuntimeError("nonpositive row width for '" + v.name + "'");
    }
    layouts.push_back(std::move(l));
  }
  return layouts;
}

ParamStore allocate_store(const CheckedModel& model, const std::vector<VarLayout>& layouts) {
  ParamStore s;
  s.real.resize(model.vars.size());
  s.ival.resize(model.vars.size());
  s.observed.assign(model.vars.size(), 0);
  for (const auto& v : model.vars) {
    const auto& l = layouts[static_cast<std::size_t>(v.id)];
    if (v.is_int) {
      s.ival[static_cast<std::size_t>(v.id)].assign(static_cast<std::size_t>(l.flat_values()), 0);
    } else {
      s.real[static_cast<std::size_t>(v.id)].assign(static_cast<std::size_t>(l.flat_values()), 0.0);
    }
    s.observed[static_cast<std::size_t>(v.id)] = v.observed_in_model ? 1 : 0;
  }
  return s;
}

void validate_store(const CheckedModel& model, const std::vector<VarLayout>& layouts,
                    const ParamStore& store) {
  if (store.real.size() != model.vars.size() || store.ival.size() != model.vars.size()) {
    throw RuntimeError("store has the wrong number of variables");
  }
  for (const auto& v : model.vars) {
    const auto& l = layouts[static_cast<std::size_t>(v.id)];
    const std::size_t want = static_cast<std::size_t>(l.flat_values());
    const std::size_t got = v.is_int ? store.ival[static_cast<std::size_t>(v.id)].size()
                                     : store.real[static_cast<std::size_t>(v.id)].size();
    if (got != want) {
      throw RuntimeError("variable '" + v.name + "' has flat length " + std::to_string(got) +
                         ", expected " + std::to_string(want));
    }
  }
}

// --- expression evaluation ----------------------------------------------------

long long EvalCtx::lookup_index(std::string_view name) const {
  for (auto it = indices.rbegin(); it != indices.rend(); ++it) {
    if (it->name == name) return it->value;
  }
  throw RuntimeError("unbound index '" + std::string(name) + "'");
}

namespace {

double read_real(const EvalCtx& ctx, int var, long long flat) {
  if (ctx.ov.var == var && ctx.ov.flat == flat) return ctx.ov.dval;
  return ctx.store->real[static_cast<std::size_t>(var)][static_cast<std::size_t>(flat)];
}

long long read_int(const EvalCtx& ctx, int var, long long flat) {
  if (ctx.ov.var == var && ctx.ov.flat == flat) return ctx.ov.ival;
  return ctx.store->ival[static_cast<std::size_t>(var)][static_cast<std::size_t>(flat)];
}

long long flatten_indices(EvalCtx& ctx, int var, const std::vector<ExprPtr>& idx) {
  const VarLayout& l = (*ctx.layouts)[static_cast<std::size_t>(var)];
  long long ix[2] = {0, 0};
  for (std::size_t i = 0; i < idx.size(); ++i) ix[i] = eval_index(idx[i], ctx);
  if (idx.empty()) return 0;
  if (idx.size() == 1) return ix[0];
  return l.flatten2(ix[0], ix[1]);
}

}  // namespace

double eval_expr(const ExprPtr& e, EvalCtx& ctx) {
  switch (e->kind) {
    case ExKind::IntLit: return static_cast<double>(e->ival);
    case ExKind::RealLit: return e->dval;
    case ExKind::HyperScalar: {
      const auto& h = ctx.model->hypers[static_cast<std::size_t>(e->id)];
      return h.type == HyperType::Int
                 ? static_cast<double>(ctx.bind->hyper_int[static_cast<std::size_t>(e->id)])
                 : ctx.bind->hyper_real[static_cast<std::size_t>(e->id)];
    }
    case ExKind::HyperElem: {
      const auto& arr = ctx.bind->hyper_arr[static_cast<std::size_t>(e->id)];
      const long long i = eval_index(e->kids[0], ctx);
      if (i < 0 || static_cast<std::size_t>(i) >= arr.size()) {
        throw RuntimeError("index " + std::to_string(i) + " out of range for '" + e->name + "'");
      }
      return static_cast<double>(arr[static_cast<std::size_t>(i)]);
    }
    case ExKind::BoundIndex: return static_cast<double>(ctx.lookup_index(e->name));
    case ExKind::DetScalar: return ctx.bind->det_scalar[static_cast<std::size_t>(e->id)];
    case ExKind::DetElem: {
      const auto& arr = ctx.bind->det_vec[static_cast<std::size_t>(e->id)];
      const long long i = eval_index(e->kids[0], ctx);
      if (i < 0 || static_cast<std::size_t>(i) >= arr.size()) {
        throw RuntimeError("index " + std::to_string(i) + " out of range for '" + e->name + "'");
      }
      return arr[static_cast<std::size_t>(i)];
    }
    case ExKind::VarElem: {
      const auto& v = ctx.model->vars[static_cast<std::size_t>(e->id)];
      const long long flat = flatten_indices(ctx, e->id, e->kids);
      const long long n = (*ctx.layouts)[static_cast<std::size_t>(e->id)].total;
      if (flat < 0 || flat >= n) {
        throw RuntimeError("element index out of range for '" + v.name + "'");
      }
      return v.is_int ? static_cast<double>(read_int(ctx, e->id, flat))
                      : read_real(ctx, e->id, flat);
    }
    case ExKind::Bin: {
      const double a = eval_expr(e->kids[0], ctx);
      const double b = eval_expr(e->kids[1], ctx);
      switch (e->op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Pow: return std::pow(a, b);
        case BinOp::Max: return a > b ? a : b;
        case BinOp::Min: return a < b ? a : b;
      }
      return 0.0;
    }
    case ExKind::SumLoop: {
      const long long n = eval_index(e->kids[0], ctx);
      double acc = 0.0;
      ctx.push_index(e->name, 0);
      for (long long i = 0; i < n; ++i) {
        ctx.indices.back().value = i;
        acc += eval_expr(e->kids[1], ctx);
      }
      ctx.pop_index();
      return acc;
    }
  }
  return 0.0;
}

long long eval_index(const ExprPtr& e, EvalCtx& ctx) {
  const double v = eval_expr(e, ctx);
  return static_cast<long long>(std::llround(v));
}

bool eval_pred(const Pred& p, EvalCtx& ctx) {
  const long long a = eval_index(p.lhs, ctx);
  const long long b = eval_index(p.rhs, ctx);
  switch (p.op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

// --- density evaluation ---------------------------------------------------------

namespace {

std::span<const double> vec_arg_span(const VecArg& va, EvalCtx& ctx) {
  switch (va.kind) {
    case VecArg::Kind::Det: {
      const auto& v = ctx.bind->det_vec[static_cast<std::size_t>(va.id)];
      return {v.data(), v.size()};
    }
    case VecArg::Kind::VarWhole: {
      const auto& v = ctx.store->real[static_cast<std::size_t>(va.id)];
      return {v.data(), v.size()};
    }
    case VecArg::Kind::VarRow: {
      const VarLayout& l = (*ctx.layouts)[static_cast<std::size_t>(va.id)];
      const long long r = eval_index(va.row, ctx);
      if (r < 0 || r >= l.total) {
        throw RuntimeError("row index " + std::to_string(r) + " out of range for '" + va.name +
                           "'");
      }
      const auto& v = ctx.store->real[static_cast<std::size_t>(va.id)];
      return {v.data() + r * l.width, static_cast<std::size_t>(l.width)};
    }
  }
  return {};
}

double atom_log_pdf(const Density& a, EvalCtx& ctx) {
  const auto& v = ctx.model->vars[static_cast<std::size_t>(a.var)];
  const VarLayout& l = (*ctx.layouts)[static_cast<std::size_t>(a.var)];
  const long long flat = flatten_indices(ctx, a.var, a.idx);
  if (flat < 0 || flat >= l.total) {
    throw RuntimeError("element index out of range for '" + v.name + "'");
  }

  switch (a.dist.family) {
    case Family::Gaussian:
      return log_pdf_gaussian(read_real(ctx, a.var, flat), eval_expr(a.dist.scalars[0], ctx),
                              eval_expr(a.dist.scalars[1], ctx));
    case Family::Uniform:
      return log_pdf_uniform(read_real(ctx, a.var, flat), eval_expr(a.dist.scalars[0], ctx),
                             eval_expr(a.dist.scalars[1], ctx));
    case Family::Beta:
      return log_pdf_beta(read_real(ctx, a.var, flat), eval_expr(a.dist.scalars[0], ctx),
                          eval_expr(a.dist.scalars[1], ctx));
    case Family::Gamma:
      return log_pdf_gamma(read_real(ctx, a.var, flat), eval_expr(a.dist.scalars[0], ctx),
                           eval_expr(a.dist.scalars[1], ctx));
    case Family::InverseGamma:
      return log_pdf_inverse_gamma(read_real(ctx, a.var, flat), eval_expr(a.dist.scalars[0], ctx),
                                   eval_expr(a.dist.scalars[1], ctx));
    case Family::Bernoulli:
      return log_pmf_bernoulli(read_int(ctx, a.var, flat), eval_expr(a.dist.scalars[0], ctx));
    case Family::Categorical: {
      const std::span<const double> w = vec_arg_span(*a.dist.vec, ctx);
      return log_pmf_categorical(read_int(ctx, a.var, flat), w);
    }
    case Family::Dirichlet: {
      const std::span<const double> alpha = vec_arg_span(*a.dist.vec, ctx);
      const auto& arr = ctx.store->real[static_cast<std::size_t>(a.var)];
      const std::span<const double> x{arr.data() + flat * l.width,
                                      static_cast<std::size_t>(l.width)};
      return log_pdf_dirichlet(x, alpha);
    }
  }
  return 0.0;
}

}  // namespace

double eval_density(const DensityPtr& d, EvalCtx& ctx) {
  switch (d->kind) {
    case DKind::Atom: return atom_log_pdf(*d, ctx);
    case DKind::Product: {
      double acc = 0.0;
      for (const auto& f : d->factors) acc += eval_density(f, ctx);
      return acc;
    }
    case DKind::IndexedProduct: {
      const long long lo = eval_index(d->lo, ctx);
      const long long hi = eval_index(d->hi, ctx);
      double acc = 0.0;
      ctx.push_index(d->index, 0);
      for (long long i = lo; i < hi; ++i) {
        ctx.indices.back().value = i;
        acc += eval_density(d->body, ctx);
      }
      ctx.pop_index();
      return acc;
    }
    case DKind::Recip: return -eval_density(d->body, ctx);
    case DKind::Integral:
      throw RuntimeError("integral node reached the runtime; plan compilation must eliminate it");
    case DKind::Guarded: {
      for (const auto& p : d->preds) {
        if (!eval_pred(p, ctx)) return 0.0;
      }
      return eval_density(d->body, ctx);
    }
  }
  return 0.0;
}

double eval_density_parallel(const DensityPtr& d, const EvalCtx& base, ParallelExecutor& pool) {
  if (d->kind == DKind::Product) {
    double acc = 0.0;
    for (const auto& f : d->factors) acc += eval_density_parallel(f, base, pool);
    return acc;
  }
  if (d->kind == DKind::IndexedProduct) {
    EvalCtx probe = base;
    const long long lo = eval_index(d->lo, probe);
    const long long hi = eval_index(d->hi, probe);
    const long long n = hi - lo;
    if (n <= 1) {
      EvalCtx ctx = base;
      return eval_density(d, ctx);
    }
    return pool.reduce_sum(n, [&](std::int64_t c0, std::int64_t c1) {
      EvalCtx ctx = base;  // thread-local copy; store is read-only here
      double acc = 0.0;
      ctx.push_index(d->index, 0);
      for (std::int64_t i = c0; i < c1; ++i) {
        ctx.indices.back().value = lo + i;
        acc += eval_density(d->body, ctx);
      }
      ctx.pop_index();
      return acc;
    });
  }
  EvalCtx ctx = base;
  return eval_density(d, ctx);
}

}  // namespace bnmc
