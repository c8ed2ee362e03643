#include "bnmc/sampler.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace bnmc {

namespace {

// RNG stream purposes; part of the determinism contract.
enum Purpose : std::uint64_t {
  kProposal = 1,
  kAccept = 2,
  kDiscrete = 3,
  kConjugate = 4,
};

std::vector<char> observed_mask(const CheckedModel& model,
                                const std::vector<std::string>& extra) {
  std::vector<char> mask(model.vars.size(), 0);
  for (const auto& v : model.vars) mask[static_cast<std::size_t>(v.id)] = v.observed_in_model;
  for (const auto& name : extra) {
    if (name.empty()) continue;
    const RandomVar* v = model.find_var(name);
    if (!v) throw RuntimeError("cannot observe unknown variable '" + name + "'");
    mask[static_cast<std::size_t>(v->id)] = 1;
  }
  return mask;
}

}  // namespace

Engine::Engine(const CheckedModel& model, const HyperValues& hyper, const RunConfig& cfg)
    : model_(model),
      cfg_(cfg),
      bind_(make_bindings(model, hyper)),
      layouts_(make_layouts(model, bind_)),
      joint_(lower(model)),
      observed_(observed_mask(model, cfg.observe_extra)),
      plan_(plan_inference(model, joint_, cfg.method, observed_, PlanConfig{cfg.mh_scale})),
      pool_(cfg.threads) {}

double Engine::eval_log_joint(const ParamStore& store) {
  return eval_density_parallel(joint_.expr, ctx(store), pool_);
}

// --- conjugate blocks ---------------------------------------------------------

void Engine::run_conjugate(const Block& b, ParamStore& store, long long iter) {
  const int var = b.vars[0];
  const RandomVar& X = model_.vars[static_cast<std::size_t>(var)];
  const VarLayout& xl = layouts_[static_cast<std::size_t>(var)];
  const ConjugateDraw& draw = *b.conj;
  const auto& names = b.cond->target_idx;

  const long long statw =
      draw.kind == PosteriorKind::DirichletCategorical ? xl.width : 2;
  std::vector<double> stats(static_cast<std::size_t>(xl.total * statw), 0.0);

  // Counting phase: fold every site into the element its bin selects.
  for (const auto& site : draw.sites) {
    EvalCtx probe = ctx(store);
    const long long outer_lo = site.binders.empty() ? 0 : eval_index(site.binders[0].lo, probe);
    const long long outer_hi = site.binders.empty() ? 1 : eval_index(site.binders[0].hi, probe);
    const long long n = outer_hi - outer_lo;
    if (n <= 0) continue;

    pool_.reduce_accumulate(
        n, xl.total * statw, stats.data(),
        [&](std::int64_t c0, std::int64_t c1, double* acc) {
          EvalCtx c = ctx(store);
          if (!site.binders.empty()) c.push_index(site.binders[0].index, 0);
          for (std::int64_t o = c0; o < c1; ++o) {
            if (!site.binders.empty()) c.indices.back().value = outer_lo + o;
            long long inner_lo = 0, inner_hi = 1;
            if (site.binders.size() > 1) {
              inner_lo = eval_index(site.binders[1].lo, c);
              inner_hi = eval_index(site.binders[1].hi, c);
              c.push_index(site.binders[1].index, 0);
            }
            for (long long j = inner_lo; j < inner_hi; ++j) {
              if (site.binders.size() > 1) c.indices.back().value = j;
              long long tix[2] = {0, 0};
              for (std::size_t l = 0; l < site.bin.size(); ++l) {
                tix[l] = eval_index(site.bin[l], c);
              }
              const long long t = xl.flatten({tix, site.bin.size()});
              if (t < 0 || t >= xl.total) {
                throw RuntimeError("conjugate update bin out of range for '" + X.name + "'");
              }
              double* a = acc + t * statw;
              long long cix[2] = {0, 0};
              for (std::size_t l = 0; l < site.child_idx.size(); ++l) {
                cix[l] = eval_index(site.child_idx[l], c);
              }
              const long long cflat =
                  layouts_[static_cast<std::size_t>(site.child_var)].flatten(
                      {cix, site.child_idx.size()});
              switch (draw.kind) {
                case PosteriorKind::DirichletCategorical: {
                  const long long v = store.ival[static_cast<std::size_t>(site.child_var)]
                                               [static_cast<std::size_t>(cflat)];
                  if (v >= 0 && v < statw) a[v] += 1.0;
                  break;
                }
                case PosteriorKind::BetaBernoulli: {
                  const long long v = store.ival[static_cast<std::size_t>(site.child_var)]
                                               [static_cast<std::size_t>(cflat)];
                  a[0] += 1.0;
                  a[1] += static_cast<double>(v);
                  break;
                }
                case PosteriorKind::GaussianMean: {
                  const double x = store.real[static_cast<std::size_t>(site.child_var)]
                                             [static_cast<std::size_t>(cflat)];
                  const double v = eval_expr(site.var, c);
                  a[0] += 1.0 / v;
                  a[1] += x / v;
                  break;
                }
                case PosteriorKind::InverseGammaVariance:
                case PosteriorKind::GammaPrecision: {
                  const double x = store.real[static_cast<std::size_t>(site.child_var)]
                                             [static_cast<std::size_t>(cflat)];
                  const double mean = eval_expr(site.mean, c);
                  a[0] += 1.0;
                  a[1] += (x - mean) * (x - mean);
                  break;
                }
              }
            }
            if (site.binders.size() > 1) c.pop_index();
          }
        });
  }

  // Draw phase.
  const RngStream key = RngStream::keyed(cfg_.seed, kConjugate, static_cast<std::uint64_t>(var),
                                         static_cast<std::uint64_t>(iter));

  if (draw.kind == PosteriorKind::DirichletCategorical) {
    std::vector<double> alpha(static_cast<std::size_t>(xl.total * xl.width));
    EvalCtx c = ctx(store);
    for (long long t = 0; t < xl.total; ++t) {
      long long ix[2];
      xl.unflatten(t, ix);
      for (std::size_t l = 0; l < names.size(); ++l) c.push_index(names[l], ix[l]);
      const std::span<const double> prior = [&]() -> std::span<const double> {
        const VecArg& va = *draw.prior.vec;
        if (va.kind == VecArg::Kind::Det) {
          const auto& v = bind_.det_vec[static_cast<std::size_t>(va.id)];
          return {v.data(), v.size()};
        }
        if (va.kind == VecArg::Kind::VarWhole) {
          const auto& v = store.real[static_cast<std::size_t>(va.id)];
          return {v.data(), v.size()};
        }
        const VarLayout& rl = layouts_[static_cast<std::size_t>(va.id)];
        const long long r = eval_index(va.row, c);
        const auto& v = store.real[static_cast<std::size_t>(va.id)];
        return {v.data() + r * rl.width, static_cast<std::size_t>(rl.width)};
      }();
      if (prior.size() != static_cast<std::size_t>(xl.width)) {
        throw RuntimeError("prior concentration size mismatch for '" + X.name + "'");
      }
      for (long long v = 0; v < xl.width; ++v) {
        alpha[static_cast<std::size_t>(t * xl.width + v)] =
            prior[static_cast<std::size_t>(v)] + stats[static_cast<std::size_t>(t * statw + v)];
      }
      for (std::size_t l = 0; l < names.size(); ++l) c.pop_index();
    }
    BatchSpec spec;
    spec.rows = xl.total;
    spec.cols = xl.width;
    spec.alpha = alpha;
    spec.per_row = true;
    auto& out = store.real[static_cast<std::size_t>(var)];
    sample_dirichlet_batch(spec, key, pool_, {out.data(), out.size()});
    return;
  }

  pool_.parallel_for(xl.total, [&](std::int64_t t0, std::int64_t t1) {
    EvalCtx c = ctx(store);
    for (std::int64_t t = t0; t < t1; ++t) {
      long long ix[2];
      xl.unflatten(t, ix);
      for (std::size_t l = 0; l < names.size(); ++l) c.push_index(names[l], ix[l]);
      RngStream rng = key.derive(static_cast<std::uint64_t>(t));
      const double s0 = eval_expr(draw.prior.scalars[0], c);
      const double s1 = eval_expr(draw.prior.scalars[1], c);
      const double n = stats[static_cast<std::size_t>(t * 2)];
      const double s = stats[static_cast<std::size_t>(t * 2 + 1)];
      double value = 0.0;
      switch (draw.kind) {
        case PosteriorKind::BetaBernoulli:
          value = draw_beta(rng, s0 + s, s1 + (n - s));
          break;
        case PosteriorKind::GaussianMean: {
          const double prec = 1.0 / s1 + n;        // n holds sum of 1/v
          const double wsum = s0 / s1 + s;         // s holds sum of x/v
          const double post_var = 1.0 / prec;
          value = draw_gaussian(rng, post_var * wsum, post_var);
          break;
        }
        case PosteriorKind::InverseGammaVariance:
          value = draw_inverse_gamma(rng, s0 + 0.5 * n, s1 + 0.5 * s);
          break;
        case PosteriorKind::GammaPrecision:
          value = draw_gamma_scaled(rng, s0 + 0.5 * n, 1.0 / (1.0 / s1 + 0.5 * s));
          break;
        case PosteriorKind::DirichletCategorical: break;  // handled above
      }
      store.real[static_cast<std::size_t>(var)][static_cast<std::size_t>(t)] = value;
      for (std::size_t l = 0; l < names.size(); ++l) c.pop_index();
    }
  });
}

// --- exact discrete blocks ------------------------------------------------------

void Engine::run_exact_discrete(const Block& b, ParamStore& store, long long iter) {
  const int var = b.vars[0];
  const RandomVar& X = model_.vars[static_cast<std::size_t>(var)];
  const VarLayout& xl = layouts_[static_cast<std::size_t>(var)];
  const auto& names = b.cond->target_idx;
  const auto& pieces = b.cond->pieces;

  auto update_element = [&](EvalCtx& c, long long t, std::vector<double>& logw) {
    long long ix[2];
    xl.unflatten(t, ix);
    for (std::size_t l = 0; l < names.size(); ++l) c.push_index(names[l], ix[l]);

    long long support = 2;
    if (X.clauses[0].dist.family == Family::Categorical) {
      support = eval_index(X.clauses[0].dist.dim, c);
    }
    logw.assign(static_cast<std::size_t>(support), 0.0);
    for (long long v = 0; v < support; ++v) {
      c.ov = Override{var, t, 0.0, v};
      double lp = 0.0;
      for (const auto& p : pieces) lp += eval_density(p.density, c);
      logw[static_cast<std::size_t>(v)] = lp;
    }
    c.ov = Override{};
    RngStream rng = RngStream::keyed(cfg_.seed, kDiscrete, static_cast<std::uint64_t>(var),
                                     static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(iter));
    store.ival[static_cast<std::size_t>(var)][static_cast<std::size_t>(t)] =
        draw_from_log_weights(rng, logw);
    for (std::size_t l = 0; l < names.size(); ++l) c.pop_index();
  };

  if (b.parallelizable) {
    pool_.parallel_for(xl.total, [&](std::int64_t t0, std::int64_t t1) {
      EvalCtx c = ctx(store);
      std::vector<double> logw;
      for (std::int64_t t = t0; t < t1; ++t) update_element(c, t, logw);
    });
  } else {
    // Sequential scan; each element sees its neighbours' fresh values.
    EvalCtx c = ctx(store);
    std::vector<double> logw;
    for (long long t = 0; t < xl.total; ++t) update_element(c, t, logw);
  }
}

// --- Metropolis blocks ----------------------------------------------------------

namespace {

long long int_support(const CheckedModel& model, const RandomVar& v, EvalCtx& c, long long flat) {
  if (v.clauses[0].dist.family == Family::Bernoulli) return 2;
  const VarLayout& l = (*c.layouts)[static_cast<std::size_t>(v.id)];
  long long ix[2];
  l.unflatten(flat, ix);
  for (std::size_t pl = 0; pl < v.plates.size(); ++pl) c.push_index(v.plates[pl].index, ix[pl]);
  const long long s = eval_index(v.clauses[0].dist.dim, c);
  for (std::size_t pl = 0; pl < v.plates.size(); ++pl) c.pop_index();
  return s;
}

}  // namespace

void Engine::run_mh_block(const Block& b, ParamStore& store, long long iter, bool* accepted) {
  // Score the blanket, propose component-wise moves for every element of the
  // block, rescore, and accept or reject the whole move.
  double before = 0.0;
  for (const auto& f : b.blanket) before += eval_density_parallel(f, ctx(store), pool_);

  std::vector<std::vector<double>> old_real(b.vars.size());
  std::vector<std::vector<long long>> old_int(b.vars.size());
  for (std::size_t i = 0; i < b.vars.size(); ++i) {
    const int var = b.vars[i];
    const RandomVar& v = model_.vars[static_cast<std::size_t>(var)];
    const VarLayout& l = layouts_[static_cast<std::size_t>(var)];
    if (v.is_int) {
      old_int[i] = store.ival[static_cast<std::size_t>(var)];
      EvalCtx c = ctx(store);
      auto& arr = store.ival[static_cast<std::size_t>(var)];
      for (long long t = 0; t < l.total; ++t) {
        RngStream rng = RngStream::keyed(cfg_.seed, kProposal, static_cast<std::uint64_t>(var),
                                         static_cast<std::uint64_t>(t),
                                         static_cast<std::uint64_t>(iter));
        const long long support = int_support(model_, v, c, t);
        arr[static_cast<std::size_t>(t)] =
            static_cast<long long>(rng.next_unit() * static_cast<double>(support));
      }
    } else {
      old_real[i] = store.real[static_cast<std::size_t>(var)];
      auto& arr = store.real[static_cast<std::size_t>(var)];
      pool_.parallel_for(l.flat_values(), [&](std::int64_t t0, std::int64_t t1) {
        for (std::int64_t t = t0; t < t1; ++t) {
          RngStream rng = RngStream::keyed(cfg_.seed, kProposal, static_cast<std::uint64_t>(var),
                                           static_cast<std::uint64_t>(t),
                                           static_cast<std::uint64_t>(iter));
          arr[static_cast<std::size_t>(t)] += cfg_.mh_scale * rng.next_gaussian();
        }
      });
    }
  }

  double after = 0.0;
  for (const auto& f : b.blanket) after += eval_density_parallel(f, ctx(store), pool_);

  const double delta = after - before;
  RngStream acc = RngStream::keyed(cfg_.seed, kAccept, static_cast<std::uint64_t>(b.vars[0]),
                                   static_cast<std::uint64_t>(iter));
  const bool take = std::isfinite(after) && std::log(acc.next_unit()) < delta;
  if (!take) {
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
      const int var = b.vars[i];
      if (model_.vars[static_cast<std::size_t>(var)].is_int) {
        store.ival[static_cast<std::size_t>(var)] = std::move(old_int[i]);
      } else {
        store.real[static_cast<std::size_t>(var)] = std::move(old_real[i]);
      }
    }
  }
  if (accepted) *accepted = take;
}

void Engine::run_mwg_block(const Block& b, ParamStore& store, long long iter) {
  // Single-site random walk against the element's own conditional numerator.
  const int var = b.vars[0];
  const RandomVar& X = model_.vars[static_cast<std::size_t>(var)];
  const VarLayout& xl = layouts_[static_cast<std::size_t>(var)];
  const auto& names = b.cond->target_idx;
  EvalCtx c = ctx(store);

  for (long long t = 0; t < xl.total; ++t) {
    long long ix[2];
    xl.unflatten(t, ix);
    for (std::size_t l = 0; l < names.size(); ++l) c.push_index(names[l], ix[l]);

    RngStream rng = RngStream::keyed(cfg_.seed, kProposal, static_cast<std::uint64_t>(var),
                                     static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(iter));
    auto numerator = [&]() {
      double lp = 0.0;
      for (const auto& p : b.cond->pieces) lp += eval_density(p.density, c);
      return lp;
    };

    if (X.is_int) {
      const long long support = int_support(model_, X, c, t);
      const long long proposal =
          static_cast<long long>(rng.next_unit() * static_cast<double>(support));
      const double before = numerator();
      c.ov = Override{var, t, 0.0, proposal};
      const double after = numerator();
      c.ov = Override{};
      if (std::isfinite(after) && std::log(rng.next_unit()) < after - before) {
        store.ival[static_cast<std::size_t>(var)][static_cast<std::size_t>(t)] = proposal;
      }
    } else {
      const double cur = store.real[static_cast<std::size_t>(var)][static_cast<std::size_t>(t)];
      const double proposal = cur + cfg_.mh_scale * rng.next_gaussian();
      const double before = numerator();
      c.ov = Override{var, t, proposal, 0};
      const double after = numerator();
      c.ov = Override{};
      if (std::isfinite(after) && std::log(rng.next_unit()) < after - before) {
        store.real[static_cast<std::size_t>(var)][static_cast<std::size_t>(t)] = proposal;
      }
    }
    for (std::size_t l = 0; l < names.size(); ++l) c.pop_index();
  }
}

double Engine::sweep(ParamStore& store, long long iter, bool* mh_accepted) {
  for (const auto& b : plan_.blocks) {
    switch (b.strategy) {
      case Strategy::Conjugate: run_conjugate(b, store, iter); break;
      case Strategy::ExactDiscrete: run_exact_discrete(b, store, iter); break;
      case Strategy::MHStep:
        if (b.one_at_a_time) {
          run_mwg_block(b, store, iter);
        } else {
          run_mh_block(b, store, iter, mh_accepted);
        }
        break;
    }
  }
  return eval_log_joint(store);
}

namespace {

Snapshot snapshot_of(const ParamStore& store, const std::vector<int>& var_ids,
                     const CheckedModel& model) {
  Snapshot s;
  for (int id : var_ids) {
    if (model.vars[static_cast<std::size_t>(id)].is_int) {
      s.ints.push_back(store.ival[static_cast<std::size_t>(id)]);
      s.real.emplace_back();
    } else {
      s.real.push_back(store.real[static_cast<std::size_t>(id)]);
      s.ints.emplace_back();
    }
  }
  return s;
}

}  // namespace

Trace Engine::run(ParamStore& store, long long n) {
  validate(store);
  Trace trace;
  trace.model = model_.name;
  trace.method = method_name(cfg_.method);
  trace.seed = cfg_.seed;
  for (const auto& v : model_.vars) {
    if (!observed_[static_cast<std::size_t>(v.id)]) {
      trace.var_ids.push_back(v.id);
      trace.var_names.push_back(v.name);
    }
  }

  trace.map_log_joint = -std::numeric_limits<double>::infinity();
  for (long long iter = 0; iter < cfg_.burnin + n; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lj = sweep(store, iter);
    const auto t1 = std::chrono::steady_clock::now();
    if (iter < cfg_.burnin) continue;
    const long long s = iter - cfg_.burnin;
    trace.log_joint.push_back(lj);
    trace.timing_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (s % cfg_.thin == 0) trace.samples.push_back(snapshot_of(store, trace.var_ids, model_));
    if (lj > trace.map_log_joint) {
      trace.map_log_joint = lj;
      trace.map_state = snapshot_of(store, trace.var_ids, model_);
    }
  }
  return trace;
}

void draw_element_from_prior(const CheckedModel& model, const Bindings& bind,
                             const std::vector<VarLayout>& layouts, ParamStore& store, int var,
                             long long elem, RngStream& rng) {
  EvalCtx c{&model, &bind, &layouts, &store, {}, {}};
  const auto& v = model.vars[static_cast<std::size_t>(var)];
  const VarLayout& l = layouts[static_cast<std::size_t>(var)];
  {
    const long long t = elem;
    {
      long long ix[2];
      l.unflatten(t, ix);
      for (std::size_t pl = 0; pl < v.plates.size(); ++pl) c.push_index(v.plates[pl].index, ix[pl]);

      // Select the clause whose guard matches the innermost index.
      const Clause* clause = &v.clauses[0];
      for (const auto& cl : v.clauses) {
        if (!cl.guard_value) continue;
        const long long g = eval_index(*cl.guard_value, c);
        const long long inner = ix[v.plates.size() - 1];
        if (cl.guard_negated ? inner != g : inner == g) {
          clause = &cl;
          break;
        }
      }

      const RDist& d = clause->dist;
      switch (d.family) {
        case Family::Dirichlet: {
          std::vector<double> alpha;
          const VecArg& va = *d.vec;
          if (va.kind == VecArg::Kind::Det) {
            alpha = bind.det_vec[static_cast<std::size_t>(va.id)];
          } else {
            const VarLayout& rl = layouts[static_cast<std::size_t>(va.id)];
            const long long r = va.row ? eval_index(va.row, c) : 0;
            const auto& arr = store.real[static_cast<std::size_t>(va.id)];
            alpha.assign(arr.begin() + r * rl.width, arr.begin() + (r + 1) * rl.width);
          }
          double* row = store.real_data(v.id) + t * l.width;
          draw_dirichlet(rng, alpha, {row, static_cast<std::size_t>(l.width)});
          break;
        }
        case Family::Categorical: {
          std::vector<double> probs;
          const VecArg& va = *d.vec;
          if (va.kind == VecArg::Kind::Det) {
            probs = bind.det_vec[static_cast<std::size_t>(va.id)];
          } else {
            const VarLayout& rl = layouts[static_cast<std::size_t>(va.id)];
            const long long r = va.row ? eval_index(va.row, c) : 0;
            const auto& arr = store.real[static_cast<std::size_t>(va.id)];
            probs.assign(arr.begin() + r * rl.width, arr.begin() + (r + 1) * rl.width);
          }
          store.int_data(v.id)[t] = draw_categorical(rng, probs);
          break;
        }
        case Family::Bernoulli:
          store.int_data(v.id)[t] = draw_bernoulli(rng, eval_expr(d.scalars[0], c));
          break;
        case Family::Gaussian:
          store.real_data(v.id)[t] =
              draw_gaussian(rng, eval_expr(d.scalars[0], c), eval_expr(d.scalars[1], c));
          break;
        case Family::Uniform:
          store.real_data(v.id)[t] =
              draw_uniform(rng, eval_expr(d.scalars[0], c), eval_expr(d.scalars[1], c));
          break;
        case Family::Beta:
          store.real_data(v.id)[t] =
              draw_beta(rng, eval_expr(d.scalars[0], c), eval_expr(d.scalars[1], c));
          break;
        case Family::Gamma:
          store.real_data(v.id)[t] =
              draw_gamma_scaled(rng, eval_expr(d.scalars[0], c), eval_expr(d.scalars[1], c));
          break;
        case Family::InverseGamma:
          store.real_data(v.id)[t] =
              draw_inverse_gamma(rng, eval_expr(d.scalars[0], c), eval_expr(d.scalars[1], c));
          break;
      }
      for (std::size_t pl = 0; pl < v.plates.size(); ++pl) c.pop_index();
    }
  }
}

void prior_init(const CheckedModel& model, const Bindings& bind,
                const std::vector<VarLayout>& layouts, ParamStore& store, std::uint64_t seed,
                bool skip_observed) {
  constexpr std::uint64_t kInit = 5;
  for (const auto& v : model.vars) {
    if (skip_observed && store.observed[static_cast<std::size_t>(v.id)]) continue;
    const VarLayout& l = layouts[static_cast<std::size_t>(v.id)];
    for (long long t = 0; t < l.total; ++t) {
      RngStream rng = RngStream::keyed(seed, kInit, static_cast<std::uint64_t>(v.id),
                                       static_cast<std::uint64_t>(t));
      draw_element_from_prior(model, bind, layouts, store, v.id, t, rng);
    }
  }
}

Trace sample(const CheckedModel& model, const HyperValues& hyper, ParamStore& store, long long n,
             const RunConfig& cfg) {
  if (n < 1) throw RuntimeError("sample count must be at least 1");
  Engine engine(model, hyper, cfg);
  // Call-time observations freeze the variable for this run.
  for (const auto& name : cfg.observe_extra) {
    if (name.empty()) continue;
    const RandomVar* v = model.find_var(name);
    if (v) store.observed[static_cast<std::size_t>(v->id)] = 1;
  }
  return engine.run(store, n);
}

ParamStore& map_estimate(const CheckedModel& model, const std::set<std::string>& observe_extra,
                         const HyperValues& hyper, ParamStore& store, long long n,
                         RunConfig cfg) {
  cfg.observe_extra.assign(observe_extra.begin(), observe_extra.end());
  const Trace trace = sample(model, hyper, store, n, cfg);
  for (std::size_t i = 0; i < trace.var_ids.size(); ++i) {
    const int id = trace.var_ids[i];
    if (model.vars[static_cast<std::size_t>(id)].is_int) {
      store.ival[static_cast<std::size_t>(id)] = trace.map_state.ints[i];
    } else {
      store.real[static_cast<std::size_t>(id)] = trace.map_state.real[i];
    }
  }
  return store;
}

}  // namespace bnmc
