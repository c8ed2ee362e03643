#include <cmath>
#include <map>

#include "bnmc/eval.hpp"
#include "bnmc/parser.hpp"
#include "bnmc/plan.hpp"
#include "bnmc/rewrite.hpp"
#include "bnmc/sampler.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace bnmc;
using namespace bnmc::test;

namespace {

HyperValues small_hypers(const std::string& fixture) {
  HyperValues h;
  if (fixture == "polyreg") {
    h.set_int("N", 6);
    h.set_int("M", 3);
  } else if (fixture == "catmix") {
    h.set_int("N", 5);
    h.set_int("K", 2);
    h.set_int("V", 3);
  } else if (fixture == "gmm") {
    h.set_int("N", 6);
    h.set_int("K", 2);
  } else if (fixture == "naivebayes") {
    h.set_int("N", 4);
    h.set_int("K", 2);
  } else if (fixture == "hmm") {
    h.set_int("N", 5);
    h.set_int("S", 2);
  } else if (fixture == "lda") {
    h.set_int("K", 2);
    h.set_int("V", 3);
    h.set_int("M", 2);
    h.set_array("N", {2, 3});
  } else if (fixture == "regression") {
    h.set_int("K", 2);
    h.set_int("N", 5);
    h.set_real("l", -1.0);
    h.set_real("u", 1.0);
  } else {
    throw std::runtime_error("no small hypers for " + fixture);
  }
  return h;
}

struct World {
  CheckedModel model;
  JointDensity joint;
  Bindings bind;
  std::vector<VarLayout> layouts;
  ParamStore store;
};

World make_world(const std::string& fixture, std::uint64_t seed) {
  World w{checked_fixture(fixture), {}, {}, {}, {}};
  w.joint = lower(w.model);
  w.bind = make_bindings(w.model, small_hypers(fixture));
  w.layouts = make_layouts(w.model, w.bind);
  w.store = allocate_store(w.model, w.layouts);
  prior_init(w.model, w.bind, w.layouts, w.store, seed, /*skip_observed=*/false);
  return w;
}

EvalCtx ctx_of(const World& w) {
  return EvalCtx{&w.model, &w.bind, &w.layouts, &w.store, {}, {}};
}

double eval_numerator(const World& w, const ConditionalForm& cond, long long elem) {
  EvalCtx c = ctx_of(w);
  long long ix[2];
  w.layouts[static_cast<std::size_t>(cond.var)].unflatten(elem, ix);
  for (std::size_t l = 0; l < cond.target_idx.size(); ++l) c.push_index(cond.target_idx[l], ix[l]);
  return eval_density(cond.numerator, c);
}

double eval_joint(const World& w) {
  EvalCtx c = ctx_of(w);
  return eval_density(w.joint.expr, c);
}

}  // namespace

TEST_CASE("two-point soundness: conditional numerators track the joint") {
  // For every fixture, every variable and several random states: flipping one
  // element between two values moves the numerator exactly as it moves the
  // joint. This is the correctness contract of the whole rewrite system.
  for (const auto& fixture : fixture_names()) {
    CAPTURE(fixture);
    for (std::uint64_t rep = 0; rep < 6; ++rep) {
      World w = make_world(fixture, 1000 + rep);
      for (const auto& v : w.model.vars) {
        CAPTURE(v.name);
        const ConditionalForm cond = derive_conditional(w.model, w.joint, v.id);
        const long long total = w.layouts[static_cast<std::size_t>(v.id)].total;
        const long long elem = static_cast<long long>(rep) % total;

        RngStream r1 = RngStream::keyed(7, rep, static_cast<std::uint64_t>(v.id), 1);
        draw_element_from_prior(w.model, w.bind, w.layouts, w.store, v.id, elem, r1);
        const double num1 = eval_numerator(w, cond, elem);
        const double joint1 = eval_joint(w);

        RngStream r2 = RngStream::keyed(7, rep, static_cast<std::uint64_t>(v.id), 2);
        draw_element_from_prior(w.model, w.bind, w.layouts, w.store, v.id, elem, r2);
        const double num2 = eval_numerator(w, cond, elem);
        const double joint2 = eval_joint(w);

        CHECK(std::abs((num1 - num2) - (joint1 - joint2)) < 1e-8);
      }
    }
  }
}

TEST_CASE("lda theta conditional matches the published derivation") {
  World w = make_world("lda", 3);
  const ConditionalForm cond =
      derive_conditional(w.model, w.joint, w.model.find_var("theta")->id);
  CHECK(render(cond.numerator) == "p(theta[m]) prod_{j<N[m]} p(z[m, j] | theta[m])");
  CHECK(cond.normalizer->kind == DKind::Integral);
  REQUIRE(cond.pieces.size() == 2);
  CHECK(cond.pieces[0].is_prior);
}

TEST_CASE("lda phi conditional partitions the word product on z") {
  World w = make_world("lda", 3);
  const ConditionalForm cond = derive_conditional(w.model, w.joint, w.model.find_var("phi")->id);
  CHECK(render(cond.numerator) ==
        "p(phi[k]) prod_{i<M} prod_{j<N[i]} {p(w[i, j] | phi[z[i, j]], z[i, j])}_{k == z[i, j]}");
  REQUIRE(cond.pieces.size() == 2);
  CHECK(cond.pieces[1].defining_guards.size() == 1);
}

TEST_CASE("priors of unrelated variables cancel") {
  const CheckedModel m = validate_model(
      parse_model("model() { x = Gaussian(0, 1).sample() y = Gaussian(x, 1).sample() }"));
  const JointDensity j = lower(m);
  const ConditionalForm cond = derive_conditional(m, j, m.find_var("y")->id);
  CHECK(render(cond.numerator) == "p(y | x)");
  REQUIRE(cond.pieces.size() == 1);

  // The conditional of x keeps both factors (prior and child likelihood).
  const ConditionalForm cx = derive_conditional(m, j, m.find_var("x")->id);
  CHECK(render(cx.numerator) == "p(x) p(y | x)");
}

TEST_CASE("derivation is deterministic") {
  for (const auto& fixture : fixture_names()) {
    World w = make_world(fixture, 4);
    for (const auto& v : w.model.vars) {
      const ConditionalForm a = derive_conditional(w.model, w.joint, v.id);
      const ConditionalForm b = derive_conditional(w.model, w.joint, v.id);
      CHECK(equal(a.numerator, b.numerator));
      CHECK(render(a.numerator) == render(b.numerator));
    }
  }
}

TEST_CASE("derived numerators stay polynomial in the joint size") {
  // The rewrite is a single structural pass, so termination is by
  // construction; this guards the output against blow-up.
  for (const auto& fixture : fixture_names()) {
    World w = make_world(fixture, 5);
    const long long joint_nodes = node_count(w.joint.expr);
    for (const auto& v : w.model.vars) {
      const ConditionalForm cond = derive_conditional(w.model, w.joint, v.id);
      CHECK(node_count(cond.numerator) <= 4 * joint_nodes + 64);
    }
  }
}

// --- conjugacy ---------------------------------------------------------------

namespace {

// Independent, sequential executor of a sufficient-statistic recipe; the
// engine's parallel version is tested against the same numbers elsewhere.
struct PosteriorParams {
  std::vector<double> alpha;  // Dirichlet
  double a = 0, b = 0;        // Beta / InverseGamma / Gamma
  double mean = 0, var = 0;   // Gaussian
};

PosteriorParams recipe_posterior(const World& w, const ConditionalForm& cond,
                                 const ConjugateDraw& draw, long long elem) {
  const VarLayout& xl = w.layouts[static_cast<std::size_t>(cond.var)];
  long long tix[2];
  xl.unflatten(elem, tix);

  double n = 0, s = 0;
  std::vector<double> counts(static_cast<std::size_t>(xl.width), 0.0);

  for (const auto& site : draw.sites) {
    EvalCtx c = ctx_of(w);
    auto run_site = [&](EvalCtx& cc) {
      long long bix[2] = {0, 0};
      for (std::size_t l = 0; l < site.bin.size(); ++l) bix[l] = eval_index(site.bin[l], cc);
      for (std::size_t l = 0; l < site.bin.size(); ++l) {
        if (bix[l] != tix[l]) return;
      }
      long long cix[2] = {0, 0};
      for (std::size_t l = 0; l < site.child_idx.size(); ++l) {
        cix[l] = eval_index(site.child_idx[l], cc);
      }
      const long long cflat = w.layouts[static_cast<std::size_t>(site.child_var)].flatten(
          {cix, site.child_idx.size()});
      const auto& child = w.model.vars[static_cast<std::size_t>(site.child_var)];
      if (child.is_int) {
        const long long v = w.store.ival[static_cast<std::size_t>(site.child_var)]
                                        [static_cast<std::size_t>(cflat)];
        if (draw.kind == PosteriorKind::DirichletCategorical) {
          counts[static_cast<std::size_t>(v)] += 1.0;
        } else {
          n += 1.0;
          s += static_cast<double>(v);
        }
      } else {
        const double x = w.store.real[static_cast<std::size_t>(site.child_var)]
                                     [static_cast<std::size_t>(cflat)];
        if (draw.kind == PosteriorKind::GaussianMean) {
          const double v = eval_expr(site.var, cc);
          n += 1.0 / v;
          s += x / v;
        } else {
          const double mean = eval_expr(site.mean, cc);
          n += 1.0;
          s += (x - mean) * (x - mean);
        }
      }
    };

    if (site.binders.empty()) {
      run_site(c);
      continue;
    }
    const long long lo0 = eval_index(site.binders[0].lo, c);
    const long long hi0 = eval_index(site.binders[0].hi, c);
    c.push_index(site.binders[0].index, 0);
    for (long long i = lo0; i < hi0; ++i) {
      c.indices.back().value = i;
      if (site.binders.size() == 1) {
        run_site(c);
        continue;
      }
      const long long lo1 = eval_index(site.binders[1].lo, c);
      const long long hi1 = eval_index(site.binders[1].hi, c);
      c.push_index(site.binders[1].index, 0);
      for (long long j = lo1; j < hi1; ++j) {
        c.indices.back().value = j;
        run_site(c);
      }
      c.pop_index();
    }
    c.pop_index();
  }

  // Prior parameters at the target element.
  EvalCtx c = ctx_of(w);
  for (std::size_t l = 0; l < cond.target_idx.size(); ++l) c.push_index(cond.target_idx[l], tix[l]);

  PosteriorParams out;
  switch (draw.kind) {
    case PosteriorKind::DirichletCategorical: {
      const VecArg& va = *draw.prior.vec;
      for (long long v = 0; v < xl.width; ++v) {
        double prior = 0.0;
        if (va.kind == VecArg::Kind::Det) {
          prior = w.bind.det_vec[static_cast<std::size_t>(va.id)][static_cast<std::size_t>(v)];
        } else {
          const VarLayout& rl = w.layouts[static_cast<std::size_t>(va.id)];
          const long long r = va.row ? eval_index(va.row, c) : 0;
          prior = w.store.real[static_cast<std::size_t>(va.id)]
                              [static_cast<std::size_t>(r * rl.width + v)];
        }
        out.alpha.push_back(prior + counts[static_cast<std::size_t>(v)]);
      }
      break;
    }
    case PosteriorKind::BetaBernoulli:
      out.a = eval_expr(draw.prior.scalars[0], c) + s;
      out.b = eval_expr(draw.prior.scalars[1], c) + (n - s);
      break;
    case PosteriorKind::GaussianMean: {
      const double m0 = eval_expr(draw.prior.scalars[0], c);
      const double v0 = eval_expr(draw.prior.scalars[1], c);
      out.var = 1.0 / (1.0 / v0 + n);
      out.mean = out.var * (m0 / v0 + s);
      break;
    }
    case PosteriorKind::InverseGammaVariance:
      out.a = eval_expr(draw.prior.scalars[0], c) + 0.5 * n;
      out.b = eval_expr(draw.prior.scalars[1], c) + 0.5 * s;
      break;
    case PosteriorKind::GammaPrecision:
      out.a = eval_expr(draw.prior.scalars[0], c) + 0.5 * n;
      out.b = 1.0 / (1.0 / eval_expr(draw.prior.scalars[1], c) + 0.5 * s);
      break;
  }
  return out;
}

double posterior_log_pdf(const World& w, const ConditionalForm& cond, const ConjugateDraw& draw,
                         const PosteriorParams& p, long long elem) {
  const auto& X = w.model.vars[static_cast<std::size_t>(cond.var)];
  const VarLayout& xl = w.layouts[static_cast<std::size_t>(cond.var)];
  if (draw.kind == PosteriorKind::DirichletCategorical) {
    const double* row = w.store.real_data(X.id) + elem * xl.width;
    return log_pdf_dirichlet({row, static_cast<std::size_t>(xl.width)}, p.alpha);
  }
  const double x = w.store.real[static_cast<std::size_t>(X.id)][static_cast<std::size_t>(elem)];
  switch (draw.kind) {
    case PosteriorKind::BetaBernoulli: return log_pdf_beta(x, p.a, p.b);
    case PosteriorKind::GaussianMean: return log_pdf_gaussian(x, p.mean, p.var);
    case PosteriorKind::InverseGammaVariance: return log_pdf_inverse_gamma(x, p.a, p.b);
    case PosteriorKind::GammaPrecision: return log_pdf_gamma(x, p.a, p.b);
    default: return 0.0;
  }
}

void check_conjugate_two_point(const std::string& fixture, const std::string& var_name) {
  for (std::uint64_t rep = 0; rep < 4; ++rep) {
    World w = make_world(fixture, 2000 + rep);
    const int var = w.model.find_var(var_name)->id;
    const ConditionalForm cond = derive_conditional(w.model, w.joint, var);
    const auto draw = detect_conjugacy(w.model, cond);
    REQUIRE(draw.has_value());
    const long long total = w.layouts[static_cast<std::size_t>(var)].total;
    const long long elem = static_cast<long long>(rep) % total;

    const PosteriorParams params = recipe_posterior(w, cond, *draw, elem);

    RngStream r1 = RngStream::keyed(21, rep, 1);
    draw_element_from_prior(w.model, w.bind, w.layouts, w.store, var, elem, r1);
    const double post1 = posterior_log_pdf(w, cond, *draw, params, elem);
    const double num1 = eval_numerator(w, cond, elem);

    RngStream r2 = RngStream::keyed(21, rep, 2);
    draw_element_from_prior(w.model, w.bind, w.layouts, w.store, var, elem, r2);
    const double post2 = posterior_log_pdf(w, cond, *draw, params, elem);
    const double num2 = eval_numerator(w, cond, elem);

    CHECK(std::abs((post1 - post2) - (num1 - num2)) < 1e-8);
  }
}

}  // namespace

TEST_CASE("lda posteriors are Dirichlet with count updates") {
  World w = make_world("lda", 9);
  const auto theta = detect_conjugacy(
      w.model, derive_conditional(w.model, w.joint, w.model.find_var("theta")->id));
  REQUIRE(theta.has_value());
  CHECK(theta->kind == PosteriorKind::DirichletCategorical);
  REQUIRE(theta->sites.size() == 1);
  CHECK(w.model.vars[static_cast<std::size_t>(theta->sites[0].child_var)].name == "z");

  const auto phi = detect_conjugacy(
      w.model, derive_conditional(w.model, w.joint, w.model.find_var("phi")->id));
  REQUIRE(phi.has_value());
  CHECK(phi->kind == PosteriorKind::DirichletCategorical);
  CHECK(w.model.vars[static_cast<std::size_t>(phi->sites[0].child_var)].name == "w");
}

TEST_CASE("conjugate posteriors equal the derived conditionals") {
  check_conjugate_two_point("lda", "theta");
  check_conjugate_two_point("lda", "phi");
  check_conjugate_two_point("gmm", "pi");
  check_conjugate_two_point("gmm", "mu");
  check_conjugate_two_point("gmm", "sigma2");
  check_conjugate_two_point("catmix", "theta");
  check_conjugate_two_point("catmix", "phi");
  check_conjugate_two_point("naivebayes", "pC");
  check_conjugate_two_point("naivebayes", "pF");
  check_conjugate_two_point("hmm", "T");
  check_conjugate_two_point("hmm", "bias");
  check_conjugate_two_point("regression", "tau");
}

TEST_CASE("beta-bernoulli two-point oracle") {
  const CheckedModel m = validate_model(parse_model(
      "model(N: int, a: real, b: real) { p = Beta(a, b).sample() x = Bernoulli(p).sample(N) "
      "observe(x) }"));
  const JointDensity j = lower(m);
  HyperValues h;
  h.set_int("N", 7);
  h.set_real("a", 1.5);
  h.set_real("b", 2.0);
  const Bindings bind = make_bindings(m, h);
  const auto layouts = make_layouts(m, bind);
  ParamStore store = allocate_store(m, layouts);
  prior_init(m, bind, layouts, store, 17, false);

  const int p_id = m.find_var("p")->id;
  const ConditionalForm cond = derive_conditional(m, j, p_id);
  const auto draw = detect_conjugacy(m, cond);
  REQUIRE(draw.has_value());
  CHECK(draw->kind == PosteriorKind::BetaBernoulli);

  // Closed form: Beta(a + sum x, b + N - sum x).
  long long sum = 0;
  for (long long x : store.ival[static_cast<std::size_t>(m.find_var("x")->id)]) sum += x;
  const double pa = 1.5 + static_cast<double>(sum);
  const double pb = 2.0 + static_cast<double>(7 - sum);

  RngStream r = RngStream::keyed(29);
  EvalCtx c{&m, &bind, &layouts, &store, {}, {}};
  for (int rep = 0; rep < 20; ++rep) {
    const double p1 = r.next_unit();
    const double p2 = r.next_unit();
    auto num_at = [&](double p) {
      store.real[static_cast<std::size_t>(p_id)][0] = p;
      EvalCtx cc = c;
      return eval_density(cond.numerator, cc);
    };
    auto joint_at = [&](double p) {
      store.real[static_cast<std::size_t>(p_id)][0] = p;
      EvalCtx cc = c;
      return eval_density(j.expr, cc);
    };
    const double dnum = num_at(p1) - num_at(p2);
    const double djoint = joint_at(p1) - joint_at(p2);
    const double dpost = log_pdf_beta(p1, pa, pb) - log_pdf_beta(p2, pa, pb);
    CHECK(std::abs(dnum - djoint) < 1e-8);
    CHECK(std::abs(dpost - dnum) < 1e-8);
  }
}

TEST_CASE("regression weights and bias have no conjugate form") {
  World w = make_world("regression", 13);
  CHECK(!detect_conjugacy(w.model, derive_conditional(w.model, w.joint, w.model.find_var("w")->id))
             .has_value());
  CHECK(!detect_conjugacy(w.model, derive_conditional(w.model, w.joint, w.model.find_var("b")->id))
             .has_value());
  // The noise variance is InverseGamma-conjugate.
  CHECK(detect_conjugacy(w.model, derive_conditional(w.model, w.joint, w.model.find_var("tau")->id))
            .has_value());
}

// --- planning ------------------------------------------------------------------

namespace {

std::vector<char> model_observed(const CheckedModel& m) {
  std::vector<char> mask(m.vars.size(), 0);
  for (const auto& v : m.vars) mask[static_cast<std::size_t>(v.id)] = v.observed_in_model;
  return mask;
}

const Block* find_block(const SamplerPlan& plan, const CheckedModel& m, const std::string& name) {
  const int id = m.find_var(name)->id;
  for (const auto& b : plan.blocks) {
    for (int v : b.vars) {
      if (v == id) return &b;
    }
  }
  return nullptr;
}

}  // namespace

TEST_CASE("gibbs plan for lda matches the published strategy") {
  World w = make_world("lda", 31);
  const SamplerPlan plan =
      plan_inference(w.model, w.joint, Method::Gibbs, model_observed(w.model));
  REQUIRE(plan.blocks.size() == 3);  // phi, theta, z; w observed
  const Block* theta = find_block(plan, w.model, "theta");
  const Block* phi = find_block(plan, w.model, "phi");
  const Block* z = find_block(plan, w.model, "z");
  REQUIRE(theta);
  REQUIRE(phi);
  REQUIRE(z);
  CHECK(theta->strategy == Strategy::Conjugate);
  CHECK(phi->strategy == Strategy::Conjugate);
  CHECK(z->strategy == Strategy::ExactDiscrete);
  CHECK(theta->parallelizable);
  CHECK(phi->parallelizable);
  CHECK(z->parallelizable);
  CHECK(plan.diagnostics.empty());
}

TEST_CASE("hmm states are planned as a sequential exact-discrete scan") {
  World w = make_world("hmm", 37);
  const SamplerPlan plan =
      plan_inference(w.model, w.joint, Method::Gibbs, model_observed(w.model));
  const Block* s = find_block(plan, w.model, "s");
  REQUIRE(s);
  CHECK(s->strategy == Strategy::ExactDiscrete);
  CHECK(!s->parallelizable);
  const Block* t = find_block(plan, w.model, "T");
  REQUIRE(t);
  CHECK(t->strategy == Strategy::Conjugate);
  CHECK(t->parallelizable);
  const Block* bias = find_block(plan, w.model, "bias");
  REQUIRE(bias);
  CHECK(bias->strategy == Strategy::Conjugate);
  CHECK(bias->parallelizable);
}

TEST_CASE("gibbs on the regression falls back to Metropolis with a diagnostic") {
  World w = make_world("regression", 41);
  const SamplerPlan plan =
      plan_inference(w.model, w.joint, Method::Gibbs, model_observed(w.model));
  const Block* wb = find_block(plan, w.model, "w");
  REQUIRE(wb);
  CHECK(wb->strategy == Strategy::MHStep);
  CHECK(!wb->one_at_a_time);
  const Block* tau = find_block(plan, w.model, "tau");
  REQUIRE(tau);
  CHECK(tau->strategy == Strategy::Conjugate);
  bool mentions_w = false;
  for (const auto& d : plan.diagnostics) mentions_w = mentions_w || d.find("w:") == 0;
  CHECK(mentions_w);

  const SamplerPlan mwg = plan_inference(w.model, w.joint, Method::MWG, model_observed(w.model));
  const Block* wmwg = find_block(mwg, w.model, "w");
  REQUIRE(wmwg);
  CHECK(wmwg->strategy == Strategy::MHStep);
  CHECK(wmwg->one_at_a_time);
}

TEST_CASE("mh plans one block over all unobserved variables") {
  World w = make_world("regression", 43);
  const SamplerPlan plan = plan_inference(w.model, w.joint, Method::MH, model_observed(w.model));
  REQUIRE(plan.blocks.size() == 1);
  CHECK(plan.blocks[0].strategy == Strategy::MHStep);
  CHECK(plan.blocks[0].vars.size() == 3);  // w, b, tau
  // The observed-data factor of x does not enter the ratio.
  CHECK(plan.blocks[0].blanket.size() == 4);
}

TEST_CASE("plan covers every unobserved variable exactly once") {
  for (const auto& fixture : fixture_names()) {
    CAPTURE(fixture);
    World w = make_world(fixture, 47);
    for (Method method : {Method::Gibbs, Method::MWG, Method::MH}) {
      const SamplerPlan plan = plan_inference(w.model, w.joint, method, model_observed(w.model));
      std::map<int, int> seen;
      for (const auto& b : plan.blocks) {
        for (int id : b.vars) seen[id] += 1;
      }
      for (const auto& v : w.model.vars) {
        CAPTURE(v.name);
        if (v.observed_in_model) {
          CHECK(seen.count(v.id) == 0);
        } else {
          CHECK(seen[v.id] == 1);
        }
      }
    }
  }
}
