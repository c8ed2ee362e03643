#include "bnmc/plan.hpp"

#include <functional>
#include <sstream>

namespace bnmc {

const char* method_name(Method m) {
  switch (m) {
    case Method::MH: return "mh";
    case Method::Gibbs: return "gibbs";
    case Method::MWG: return "mwg";
  }
  return "?";
}

bool lookup_method(std::string_view name, Method* out) {
  if (name == "mh") {
    *out = Method::MH;
    return true;
  }
  if (name == "gibbs") {
    *out = Method::Gibbs;
    return true;
  }
  if (name == "mwg") {
    *out = Method::MWG;
    return true;
  }
  return false;
}

namespace {

ExprPtr defining_view(const ExprPtr& e, const Piece& p) {
  ExprPtr out = e;
  for (const auto& g : p.defining_guards) out = subst_equal(out, g.rhs, g.lhs);
  return out;
}

// A family can be resampled element-parallel when, piece by piece, every
// reference to the family resolves to the target element itself (possibly via
// the piece's equality guards). A reference to a neighbouring element (Markov
// chains) serializes the block.
bool conditional_parallelizable(const CheckedModel& model, const ConditionalForm& cond) {
  const auto& X = model.vars[static_cast<std::size_t>(cond.var)];
  ExprPtr expected;
  {
    Expr e;
    e.kind = ExKind::VarElem;
    e.id = X.id;
    e.name = X.name;
    e.is_int = X.is_int;
    for (const auto& n : cond.target_idx) e.kids.push_back(make_index(n));
    expected = std::make_shared<const Expr>(std::move(e));
  }

  for (const auto& p : cond.pieces) {
    if (p.dense) return false;

    bool ok = true;
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
      if (!e || !ok) return;
      if (e->kind == ExKind::VarElem && e->id == X.id) {
        if (!equal(defining_view(e, p), expected)) ok = false;
        return;
      }
      for (const auto& k : e->kids) walk(k);
    };

    const Density& atom = *p.atom_subst;
    if (atom.var == X.id) {
      Expr subj;
      subj.kind = ExKind::VarElem;
      subj.id = X.id;
      subj.name = X.name;
      subj.is_int = X.is_int;
      subj.kids = atom.idx;
      if (!equal(defining_view(std::make_shared<const Expr>(std::move(subj)), p), expected)) {
        return false;
      }
    }
    if (atom.dist.dim) walk(atom.dist.dim);
    if (atom.dist.vec) {
      if (atom.dist.vec->id == X.id && atom.dist.vec->kind != VecArg::Kind::Det) {
        // Row selections of the target were already matched by the rewrite.
        if (atom.dist.vec->kind == VecArg::Kind::VarRow) {
          ExprPtr row = defining_view(atom.dist.vec->row, p);
          if (!X.plates.empty() && !equal(row, make_index(cond.target_idx[0]))) return false;
        }
      }
      if (atom.dist.vec->row) walk(atom.dist.vec->row);
    }
    for (const auto& s : atom.dist.scalars) walk(s);
    for (const auto& g : p.range_guards) {
      walk(g.lhs);
      walk(g.rhs);
    }
    for (const auto& g : p.defining_guards) {
      walk(g.lhs);
      walk(g.rhs);
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

SamplerPlan plan_inference(const CheckedModel& model, const JointDensity& joint, Method method,
                           const std::vector<char>& observed, const PlanConfig& config) {
  SamplerPlan plan;
  plan.method = method;
  plan.config = config;
  plan.ir_node_count = node_count(joint.expr);

  auto is_observed = [&](int id) {
    return id < static_cast<int>(observed.size()) && observed[static_cast<std::size_t>(id)];
  };

  if (method == Method::MH) {
    Block b;
    b.strategy = Strategy::MHStep;
    for (const auto& v : model.vars) {
      if (!is_observed(v.id)) b.vars.push_back(v.id);
    }
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
      for (int id : b.vars) {
        if (mentions_var(joint.var_factors[i], id)) {
          b.blanket.push_back(joint.var_factors[i]);
          break;
        }
      }
    }
    if (!b.vars.empty()) plan.blocks.push_back(std::move(b));
    return plan;
  }

  for (const auto& v : model.vars) {
    if (is_observed(v.id)) continue;
    Block b;
    b.vars = {v.id};
    b.cond = std::make_shared<const ConditionalForm>(derive_conditional(model, joint, v.id));
    plan.ir_node_count += node_count(b.cond->numerator);
    b.parallelizable = conditional_parallelizable(model, *b.cond);

    if (auto conj = detect_conjugacy(model, *b.cond)) {
      b.strategy = Strategy::Conjugate;
      b.conj = std::move(conj);
    } else if (v.is_int) {
      b.strategy = Strategy::ExactDiscrete;
    } else {
      b.strategy = Strategy::MHStep;
      b.one_at_a_time = method == Method::MWG;
      b.parallelizable = !b.one_at_a_time;
      for (std::size_t i = 0; i < model.vars.size(); ++i) {
        if (mentions_var(joint.var_factors[i], v.id)) b.blanket.push_back(joint.var_factors[i]);
      }
      plan.diagnostics.push_back(v.name + ": no conjugate form found; " +
                                 (method == Method::MWG ? "single-site" : "random-walk") +
                                 " Metropolis-Hastings fallback");
    }
    plan.blocks.push_back(std::move(b));
  }
  return plan;
}

// --- rendering -------------------------------------------------------------

namespace {

std::string render_target(const CheckedModel& model, const ConditionalForm& cond) {
  const auto& X = model.vars[static_cast<std::size_t>(cond.var)];
  std::string s = X.name;
  if (!cond.target_idx.empty()) {
    s += "[";
    for (std::size_t i = 0; i < cond.target_idx.size(); ++i) {
      if (i) s += ", ";
      s += cond.target_idx[i];
    }
    s += "]";
  }
  return s;
}

std::string render_vec_arg(const VecArg& v) {
  switch (v.kind) {
    case VecArg::Kind::Det:
    case VecArg::Kind::VarWhole: return v.name;
    case VecArg::Kind::VarRow: return v.name + "[" + render(v.row) + "]";
  }
  return "?";
}

std::string render_sites(const SuffSite& site, const std::vector<std::string>& target_idx) {
  std::ostringstream os;
  os << "sites (";
  if (site.binders.empty()) {
    os << "singleton";
  } else {
    for (std::size_t b = 0; b < site.binders.size(); ++b) {
      if (b) os << ", ";
      const bool zero_lo = site.binders[b].lo->kind == ExKind::IntLit &&
                           site.binders[b].lo->ival == 0;
      if (zero_lo) {
        os << site.binders[b].index << "<" << render(site.binders[b].hi);
      } else {
        os << render(site.binders[b].lo) << "<=" << site.binders[b].index << "<"
           << render(site.binders[b].hi);
      }
    }
  }
  os << ")";
  bool first = true;
  for (std::size_t l = 0; l < site.bin.size(); ++l) {
    os << (first ? " with " : ", ") << render(site.bin[l]) << " == " << target_idx[l];
    first = false;
  }
  return os.str();
}

std::string render_child(const CheckedModel& model, const SuffSite& site) {
  std::string s = model.vars[static_cast<std::size_t>(site.child_var)].name;
  if (!site.child_idx.empty()) {
    s += "[";
    for (std::size_t i = 0; i < site.child_idx.size(); ++i) {
      if (i) s += ", ";
      s += render(site.child_idx[i]);
    }
    s += "]";
  }
  return s;
}

std::string render_conjugate(const CheckedModel& model, const ConditionalForm& cond,
                             const ConjugateDraw& draw) {
  std::ostringstream os;
  const std::string target = render_target(model, cond);
  switch (draw.kind) {
    case PosteriorKind::DirichletCategorical: {
      os << target << " ~ Dirichlet(" << render_vec_arg(*draw.prior.vec) << " + c)";
      for (const auto& s : draw.sites) {
        os << "; c[val] += [" << render_child(model, s) << " == val] over "
           << render_sites(s, cond.target_idx);
      }
      break;
    }
    case PosteriorKind::BetaBernoulli: {
      os << target << " ~ Beta(" << render(draw.prior.scalars[0]) << " + s, "
         << render(draw.prior.scalars[1]) << " + n - s)";
      for (const auto& s : draw.sites) {
        os << "; n, s += 1, " << render_child(model, s) << " over "
           << render_sites(s, cond.target_idx);
      }
      break;
    }
    case PosteriorKind::GaussianMean: {
      os << target << " ~ Gaussian(m*, v*) with 1/v* = 1/(" << render(draw.prior.scalars[1])
         << ") + P, m* = v* * ((" << render(draw.prior.scalars[0]) << ")/("
         << render(draw.prior.scalars[1]) << ") + W)";
      for (const auto& s : draw.sites) {
        os << "; P += 1/(" << render(s.var) << "), W += " << render_child(model, s) << "/("
           << render(s.var) << ") over " << render_sites(s, cond.target_idx);
      }
      break;
    }
    case PosteriorKind::InverseGammaVariance: {
      os << target << " ~ InverseGamma(" << render(draw.prior.scalars[0]) << " + n/2, "
         << render(draw.prior.scalars[1]) << " + rss/2)";
      for (const auto& s : draw.sites) {
        os << "; n, rss += 1, (" << render_child(model, s) << " - (" << render(s.mean)
           << "))^2 over " << render_sites(s, cond.target_idx);
      }
      break;
    }
    case PosteriorKind::GammaPrecision: {
      os << target << " ~ Gamma(" << render(draw.prior.scalars[0])
         << " + n/2, 1/(1/(" << render(draw.prior.scalars[1]) << ") + rss/2))";
      for (const auto& s : draw.sites) {
        os << "; n, rss += 1, (" << render_child(model, s) << " - (" << render(s.mean)
           << "))^2 over " << render_sites(s, cond.target_idx);
      }
      break;
    }
  }
  return os.str();
}

}  // namespace

std::string render_conditional(const CheckedModel& model, const ConditionalForm& cond) {
  std::ostringstream os;
  os << render_target(model, cond) << " | rest propto " << render(cond.numerator);
  return os.str();
}

std::string describe_plan(const CheckedModel& model, const JointDensity& joint,
                          const SamplerPlan& plan) {
  std::ostringstream os;
  os << "model: " << model.name << "\n";
  os << "method: " << method_name(plan.method) << "\n";
  os << "observed:";
  for (const auto& o : model.observed) os << " " << o;
  os << "\n\njoint:\n  " << render(joint.expr) << "\n";

  for (const auto& b : plan.blocks) {
    os << "\n";
    if (plan.method == Method::MH) {
      os << "block:";
      for (int id : b.vars) os << " " << model.vars[static_cast<std::size_t>(id)].name;
      os << "\n  strategy: joint random-walk Metropolis-Hastings (scale "
         << plan.config.mh_scale << "), log ratio evaluated in parallel over "
         << b.blanket.size() << " blanket factors\n";
      continue;
    }
    const auto& cond = *b.cond;
    os << render_conditional(model, cond) << "\n";
    os << "  normalizer: ";
    switch (b.strategy) {
      case Strategy::Conjugate:
        os << "recognized closed form\n  strategy: conjugate draw "
           << render_conjugate(model, cond, *b.conj) << "\n";
        break;
      case Strategy::ExactDiscrete:
        os << "finite sum over the support\n  strategy: exact discrete (pmf in log space, "
              "max-subtracted)\n";
        break;
      case Strategy::MHStep:
        os << "unresolved integral (not needed by Metropolis)\n  strategy: "
           << (b.one_at_a_time ? "single-site" : "random-walk") << " Metropolis-Hastings (scale "
           << plan.config.mh_scale << ")\n";
        break;
    }
    os << "  parallelizable: " << (b.parallelizable ? "yes" : "no (sequential scan)") << "\n";
  }

  if (!plan.diagnostics.empty()) {
    os << "\ndiagnostics:\n";
    for (const auto& d : plan.diagnostics) os << "  " << d << "\n";
  }
  return os.str();
}

}  // namespace bnmc
