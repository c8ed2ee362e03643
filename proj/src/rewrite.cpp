#include "bnmc/rewrite.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace bnmc {

namespace {

// Folds constant offsets so that (t + 1) - 1 reads t.
ExprPtr simplify_affine(const ExprPtr& e) {
  if (!e || !e->is_int) return e;
  if (auto av = affine_view(e)) {
    if (!av->base) return make_int(av->offset);
    if (av->offset == 0) return av->base;
    if (av->offset > 0) return make_bin(BinOp::Add, av->base, make_int(av->offset));
    return make_bin(BinOp::Sub, av->base, make_int(-av->offset));
  }
  return e;
}

ExprPtr deep_simplify(const ExprPtr& e) {
  if (!e) return e;
  bool changed = false;
  std::vector<ExprPtr> kids;
  kids.reserve(e->kids.size());
  for (const auto& k : e->kids) {
    ExprPtr nk = deep_simplify(k);
    changed = changed || nk != k;
    kids.push_back(std::move(nk));
  }
  ExprPtr out = e;
  if (changed) {
    Expr copy = *e;
    copy.kids = std::move(kids);
    out = std::make_shared<const Expr>(std::move(copy));
  }
  return simplify_affine(out);
}

struct FactorNest {
  std::vector<Binder> binders;
  DensityPtr atom;
};

void decompose(const DensityPtr& f, std::vector<Binder> acc, std::vector<FactorNest>& out) {
  switch (f->kind) {
    case DKind::Atom:
      out.push_back({std::move(acc), f});
      return;
    case DKind::Product:
      for (const auto& part : f->factors) decompose(part, acc, out);
      return;
    case DKind::IndexedProduct: {
      acc.push_back({f->index, f->lo, f->hi});
      decompose(f->body, std::move(acc), out);
      return;
    }
    default:
      throw CheckError("unexpected node in a lowered joint density");
  }
}

struct Occurrence {
  std::vector<ExprPtr> tuple;
  bool lhs = false;
};

void collect_tuples_expr(const ExprPtr& e, int var, std::vector<Occurrence>& out) {
  if (!e) return;
  if (e->kind == ExKind::VarElem && e->id == var) out.push_back({e->kids, false});
  for (const auto& k : e->kids) collect_tuples_expr(k, var, out);
}

std::vector<Occurrence> collect_occurrences(const Density& atom, int var) {
  std::vector<Occurrence> raw;
  if (atom.var == var) raw.push_back({atom.idx, true});
  if (atom.dist.dim) collect_tuples_expr(atom.dist.dim, var, raw);
  if (atom.dist.vec) {
    const VecArg& v = *atom.dist.vec;
    if (v.id == var && v.kind == VecArg::Kind::VarRow) raw.push_back({{v.row}, false});
    if (v.id == var && v.kind == VecArg::Kind::VarWhole) raw.push_back({{}, false});
    if (v.row) collect_tuples_expr(v.row, var, raw);
  }
  for (const auto& s : atom.dist.scalars) collect_tuples_expr(s, var, raw);

  std::vector<Occurrence> out;
  for (auto& o : raw) {
    bool dup = false;
    for (auto& kept : out) {
      if (kept.tuple.size() != o.tuple.size()) continue;
      bool same = true;
      for (std::size_t i = 0; i < o.tuple.size(); ++i) {
        same = same && equal(kept.tuple[i], o.tuple[i]);
      }
      if (same) {
        kept.lhs = kept.lhs || o.lhs;
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(o));
  }
  return out;
}

void collect_bound_names(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == ExKind::BoundIndex) out.insert(e->name);
  for (const auto& k : e->kids) collect_bound_names(k, out);
}

void collect_joint_index_names(const DensityPtr& d, std::set<std::string>& out) {
  std::function<void(const ExprPtr&)> walk_expr = [&](const ExprPtr& x) {
    if (!x) return;
    if (x->kind == ExKind::SumLoop) out.insert(x->name);
    for (const auto& k : x->kids) walk_expr(k);
  };
  switch (d->kind) {
    case DKind::Atom: {
      for (const auto& i : d->idx) walk_expr(i);
      if (d->dist.dim) walk_expr(d->dist.dim);
      if (d->dist.vec && d->dist.vec->row) walk_expr(d->dist.vec->row);
      for (const auto& s : d->dist.scalars) walk_expr(s);
      return;
    }
    case DKind::Product:
      for (const auto& f : d->factors) collect_joint_index_names(f, out);
      return;
    case DKind::IndexedProduct:
      out.insert(d->index);
      collect_joint_index_names(d->body, out);
      return;
    case DKind::Recip:
    case DKind::Integral:
    case DKind::Guarded:
      collect_joint_index_names(d->body, out);
      return;
  }
}

DensityPtr subst_atom(const DensityPtr& atom, const std::string& index, const ExprPtr& value) {
  Density copy = *atom;
  auto sub = [&](ExprPtr& e) {
    if (e) e = deep_simplify(subst_index(e, index, value));
  };
  for (auto& i : copy.idx) sub(i);
  if (copy.dist.dim) sub(copy.dist.dim);
  if (copy.dist.vec && copy.dist.vec->row) sub(copy.dist.vec->row);
  for (auto& s : copy.dist.scalars) sub(s);
  return std::make_shared<const Density>(std::move(copy));
}

struct Slot {
  int binder = -1;    // solved binder position, -1 when guarded
  long long off = 0;  // solved: binder value = target - off
  bool guard = false;
};

class Deriver {
 public:
  Deriver(const CheckedModel& model, const JointDensity& joint, int var)
      : model_(model), joint_(joint), var_(var), X_(model.vars[static_cast<std::size_t>(var)]) {}

  ConditionalForm run() {
    collect_reserved();
    // Prefer the variable's own plate index names for the target element;
    // fall back to fresh names if a substitution would be captured.
    std::vector<std::string> preferred;
    for (const auto& p : X_.plates) preferred.push_back(p.index);
    if (auto form = try_build(preferred)) return std::move(*form);
    return *try_build(fresh_names(X_.plates.size()));
  }

 private:
  void collect_reserved() {
    reserved_.clear();
    for (const auto& h : model_.hypers) reserved_.insert(h.name);
    for (const auto& d : model_.dets) reserved_.insert(d.name);
    for (const auto& v : model_.vars) reserved_.insert(v.name);
    collect_joint_index_names(joint_.expr, reserved_);
  }

  std::vector<std::string> fresh_names(std::size_t n) const {
    static const char* pool[] = {"m", "n", "q", "r", "u", "g", "h", "o", "p", "a", "b", "c"};
    std::vector<std::string> out;
    std::set<std::string> taken = reserved_;
    while (out.size() < n) {
      bool found = false;
      for (const char* cand : pool) {
        if (!taken.count(cand)) {
          out.emplace_back(cand);
          taken.insert(cand);
          found = true;
          break;
        }
      }
      for (int s = 2; !found; ++s) {
        std::string cand = "m" + std::to_string(s);
        if (!taken.count(cand)) {
          out.push_back(cand);
          taken.insert(cand);
          found = true;
        }
      }
    }
    return out;
  }

  std::optional<ConditionalForm> try_build(const std::vector<std::string>& names) const {
    ConditionalForm form;
    form.var = var_;
    form.target_idx = names;
    for (std::size_t l = 0; l < X_.plates.size(); ++l) {
      ExprPtr hi = X_.plates[l].count;
      for (std::size_t e = 0; e < l; ++e) {
        hi = subst_index(hi, X_.plates[e].index, make_index(names[e]));
      }
      form.target_domains.push_back({names[l], hi});
    }

    std::vector<FactorNest> nests;
    for (const auto& f : joint_.var_factors) decompose(f, {}, nests);

    for (const auto& nest : nests) {
      if (!handle_nest(nest, form)) return std::nullopt;  // capture; caller retries
    }

    std::vector<DensityPtr> ds;
    for (const auto& p : form.pieces) ds.push_back(p.density);
    form.numerator = make_product(std::move(ds));

    std::vector<ExprPtr> tix;
    for (const auto& n : names) tix.push_back(make_index(n));
    form.normalizer = make_integral(X_, std::move(tix), form.numerator);
    return form;
  }

  bool handle_nest(const FactorNest& nest, ConditionalForm& form) const {
    const auto occs = collect_occurrences(*nest.atom, var_);
    if (occs.empty()) return true;  // cancels: no dependence on the target

    struct Classified {
      const Occurrence* occ;
      std::vector<Slot> slots;
      bool all_solved = true;
    };
    std::vector<Classified> cls;
    for (const auto& o : occs) {
      Classified c{&o, {}, true};
      std::vector<bool> used(nest.binders.size(), false);
      for (const auto& e : o.tuple) {
        Slot s;
        if (auto av = affine_view(e); av && av->base && av->base->kind == ExKind::BoundIndex) {
          for (std::size_t b = 0; b < nest.binders.size(); ++b) {
            if (!used[b] && nest.binders[b].index == av->base->name) {
              s.binder = static_cast<int>(b);
              s.off = av->offset;
              used[b] = true;
              break;
            }
          }
        }
        if (s.binder < 0) {
          // Occurrences through sum indices cannot be split per site.
          std::set<std::string> bound;
          collect_bound_names(e, bound);
          for (const auto& n : bound) {
            bool site_binder = false;
            for (const auto& b : nest.binders) site_binder = site_binder || b.index == n;
            if (!site_binder) return dense_piece(nest, form);
          }
          s.guard = true;
          c.all_solved = false;
        }
        c.slots.push_back(s);
      }
      cls.push_back(std::move(c));
    }

    if (cls.size() > 1) {
      // Several occurrences are separable only when each is fully resolved by
      // index arithmetic and they always land on distinct sites.
      for (const auto& c : cls) {
        if (!c.all_solved) return dense_piece(nest, form);
      }
      for (std::size_t a = 0; a + 1 < cls.size(); ++a) {
        for (std::size_t b = a + 1; b < cls.size(); ++b) {
          bool disjoint = false;
          for (const auto& sa : cls[a].slots) {
            for (const auto& sb : cls[b].slots) {
              if (sa.binder >= 0 && sa.binder == sb.binder && sa.off != sb.off) disjoint = true;
            }
          }
          if (!disjoint) return dense_piece(nest, form);
        }
      }
    }

    for (const auto& c : cls) {
      if (!build_piece(nest, *c.occ, c.slots, form)) return false;
    }
    return true;
  }

  bool dense_piece(const FactorNest& nest, ConditionalForm& form) const {
    Piece p;
    p.dense = true;
    p.site_binders = nest.binders;
    p.solved_value.assign(nest.binders.size(), nullptr);
    p.atom = nest.atom;
    p.atom_subst = nest.atom;
    DensityPtr d = nest.atom;
    for (std::size_t b = nest.binders.size(); b-- > 0;) {
      d = make_indexed_product(nest.binders[b].index, nest.binders[b].lo, nest.binders[b].hi, d);
    }
    p.density = std::move(d);
    form.pieces.push_back(std::move(p));
    return true;
  }

  bool build_piece(const FactorNest& nest, const Occurrence& occ, const std::vector<Slot>& slots,
                   ConditionalForm& form) const {
    const auto& names = form.target_idx;
    Piece p;
    p.is_prior = occ.lhs;
    p.site_binders = nest.binders;
    p.solved_value.assign(nest.binders.size(), nullptr);
    p.bin = occ.tuple;
    p.atom = nest.atom;

    for (std::size_t l = 0; l < slots.size(); ++l) {
      if (slots[l].binder < 0) continue;
      ExprPtr value =
          slots[l].off == 0
              ? make_index(names[l])
              : simplify_affine(make_bin(BinOp::Sub, make_index(names[l]), make_int(slots[l].off)));
      p.solved_value[static_cast<std::size_t>(slots[l].binder)] = std::move(value);
    }

    // Capture check: substituted values must not mention kept binders.
    for (std::size_t b = 0; b < nest.binders.size(); ++b) {
      if (p.solved_value[b]) continue;
      for (std::size_t b2 = 0; b2 < nest.binders.size(); ++b2) {
        if (!p.solved_value[b2]) continue;
        std::set<std::string> refs;
        collect_bound_names(p.solved_value[b2], refs);
        if (refs.count(nest.binders[b].index)) return false;
      }
    }

    DensityPtr atom = nest.atom;
    std::vector<Binder> kept;
    std::vector<Pred> range_guards;
    for (std::size_t b = 0; b < nest.binders.size(); ++b) {
      if (!p.solved_value[b]) {
        kept.push_back(nest.binders[b]);
        continue;
      }
      const ExprPtr& v = p.solved_value[b];
      atom = subst_atom(atom, nest.binders[b].index, v);
      ExprPtr lo = nest.binders[b].lo;
      ExprPtr hi = nest.binders[b].hi;
      for (std::size_t b2 = 0; b2 < b; ++b2) {
        if (p.solved_value[b2]) {
          lo = deep_simplify(subst_index(lo, nest.binders[b2].index, p.solved_value[b2]));
          hi = deep_simplify(subst_index(hi, nest.binders[b2].index, p.solved_value[b2]));
        }
      }
      range_guards.push_back({CmpOp::Ge, v, lo});
      range_guards.push_back({CmpOp::Lt, v, hi});
    }
    for (auto& k : kept) {
      for (std::size_t b2 = 0; b2 < nest.binders.size(); ++b2) {
        if (p.solved_value[b2]) {
          k.lo = deep_simplify(subst_index(k.lo, nest.binders[b2].index, p.solved_value[b2]));
          k.hi = deep_simplify(subst_index(k.hi, nest.binders[b2].index, p.solved_value[b2]));
        }
      }
    }

    for (std::size_t l = 0; l < slots.size(); ++l) {
      if (!slots[l].guard) continue;
      ExprPtr site = occ.tuple[l];
      for (std::size_t b2 = 0; b2 < nest.binders.size(); ++b2) {
        if (p.solved_value[b2]) {
          site = deep_simplify(subst_index(site, nest.binders[b2].index, p.solved_value[b2]));
        }
      }
      p.defining_guards.push_back({CmpOp::Eq, make_index(names[l]), site});
    }

    for (const auto& g : range_guards) {
      switch (decide(g, form.target_domains)) {
        case Truth::True: break;
        case Truth::False: return true;  // statically empty; the piece vanishes
        case Truth::Unknown: p.range_guards.push_back(g); break;
      }
    }

    p.atom_subst = atom;
    std::vector<Pred> inner = p.range_guards;
    inner.insert(inner.end(), p.defining_guards.begin(), p.defining_guards.end());
    DensityPtr d = inner.empty() ? atom : make_guarded(std::move(inner), atom);
    for (std::size_t b = kept.size(); b-- > 0;) {
      d = make_indexed_product(kept[b].index, kept[b].lo, kept[b].hi, d);
    }
    p.density = std::move(d);
    form.pieces.push_back(std::move(p));
    return true;
  }

  const CheckedModel& model_;
  const JointDensity& joint_;
  int var_;
  const RandomVar& X_;
  std::set<std::string> reserved_;
};

}  // namespace

ConditionalForm derive_conditional(const CheckedModel& model, const JointDensity& joint, int var) {
  return Deriver(model, joint, var).run();
}

const char* posterior_kind_name(PosteriorKind k) {
  switch (k) {
    case PosteriorKind::DirichletCategorical: return "Dirichlet";
    case PosteriorKind::BetaBernoulli: return "Beta";
    case PosteriorKind::GaussianMean: return "Gaussian";
    case PosteriorKind::InverseGammaVariance: return "InverseGamma";
    case PosteriorKind::GammaPrecision: return "Gamma";
  }
  return "?";
}

// --- conjugacy -----------------------------------------------------------------

namespace {

ExprPtr apply_defining(const ExprPtr& e, const Piece& p) {
  ExprPtr out = e;
  for (const auto& g : p.defining_guards) out = subst_equal(out, g.rhs, g.lhs);
  return out;
}

ExprPtr target_elem_ref(const CheckedModel& model, const ConditionalForm& cond) {
  const auto& X = model.vars[static_cast<std::size_t>(cond.var)];
  Expr e;
  e.kind = ExKind::VarElem;
  e.id = X.id;
  e.name = X.name;
  e.is_int = X.is_int;
  for (const auto& n : cond.target_idx) e.kids.push_back(make_index(n));
  return std::make_shared<const Expr>(std::move(e));
}

}  // namespace

std::optional<ConjugateDraw> detect_conjugacy(const CheckedModel& model,
                                              const ConditionalForm& cond) {
  const auto& X = model.vars[static_cast<std::size_t>(cond.var)];

  const Piece* prior = nullptr;
  std::vector<const Piece*> likes;
  for (const auto& p : cond.pieces) {
    if (p.is_prior) {
      if (prior || p.dense || !p.defining_guards.empty() || !p.range_guards.empty()) {
        return std::nullopt;  // clause-split or irregular prior
      }
      prior = &p;
    } else {
      likes.push_back(&p);
    }
  }
  if (!prior) return std::nullopt;

  PosteriorKind kind;
  switch (prior->atom_subst->dist.family) {
    case Family::Dirichlet: kind = PosteriorKind::DirichletCategorical; break;
    case Family::Beta: kind = PosteriorKind::BetaBernoulli; break;
    case Family::Gaussian: kind = PosteriorKind::GaussianMean; break;
    case Family::InverseGamma: kind = PosteriorKind::InverseGammaVariance; break;
    case Family::Gamma: kind = PosteriorKind::GammaPrecision; break;
    default: return std::nullopt;
  }

  const ExprPtr target = target_elem_ref(model, cond);
  ConjugateDraw draw;
  draw.kind = kind;
  draw.prior = prior->atom_subst->dist;

  for (const Piece* p : likes) {
    if (p->dense) return std::nullopt;
    const Density& atom = *p->atom_subst;
    if (atom.var == X.id) return std::nullopt;
    SuffSite site;
    site.binders = p->site_binders;
    site.bin = p->bin;
    site.child_var = p->atom->var;
    site.child_idx = p->atom->idx;

    switch (kind) {
      case PosteriorKind::DirichletCategorical: {
        if (atom.dist.family != Family::Categorical) return std::nullopt;
        if (!atom.dist.vec || atom.dist.vec->id != X.id) return std::nullopt;
        if (X.plates.empty()) {
          if (atom.dist.vec->kind != VecArg::Kind::VarWhole) return std::nullopt;
        } else {
          if (atom.dist.vec->kind != VecArg::Kind::VarRow) return std::nullopt;
          const ExprPtr row = apply_defining(atom.dist.vec->row, *p);
          if (!equal(row, make_index(cond.target_idx[0]))) return std::nullopt;
        }
        if (!X.elem_dim || !equal(atom.dist.dim, X.elem_dim)) return std::nullopt;
        if (mentions_var(atom.dist.dim, X.id)) return std::nullopt;
        break;
      }
      case PosteriorKind::BetaBernoulli: {
        if (atom.dist.family != Family::Bernoulli) return std::nullopt;
        if (!equal(apply_defining(atom.dist.scalars[0], *p), target)) return std::nullopt;
        break;
      }
      case PosteriorKind::GaussianMean: {
        if (atom.dist.family != Family::Gaussian) return std::nullopt;
        if (!equal(apply_defining(atom.dist.scalars[0], *p), target)) return std::nullopt;
        if (mentions_var(atom.dist.scalars[1], X.id)) return std::nullopt;
        site.var = p->atom->dist.scalars[1];
        break;
      }
      case PosteriorKind::InverseGammaVariance: {
        if (atom.dist.family != Family::Gaussian) return std::nullopt;
        if (!equal(apply_defining(atom.dist.scalars[1], *p), target)) return std::nullopt;
        if (mentions_var(atom.dist.scalars[0], X.id)) return std::nullopt;
        site.mean = p->atom->dist.scalars[0];
        break;
      }
      case PosteriorKind::GammaPrecision: {
        if (atom.dist.family != Family::Gaussian) return std::nullopt;
        const ExprPtr var = apply_defining(atom.dist.scalars[1], *p);
        if (!(var->kind == ExKind::Bin && var->op == BinOp::Pow && equal(var->kids[0], target))) {
          return std::nullopt;
        }
        const ExprPtr& ex = var->kids[1];
        const bool minus_one = (ex->kind == ExKind::IntLit && ex->ival == -1) ||
                               (ex->kind == ExKind::RealLit && ex->dval == -1.0);
        if (!minus_one) return std::nullopt;
        if (mentions_var(atom.dist.scalars[0], X.id)) return std::nullopt;
        site.mean = p->atom->dist.scalars[0];
        break;
      }
    }
    draw.sites.push_back(std::move(site));
  }
  return draw;
}

}  // namespace bnmc
