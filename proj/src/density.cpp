#include "bnmc/density.hpp"

#include <sstream>

namespace bnmc {

namespace {
DensityPtr mk(Density d) { return std::make_shared<const Density>(std::move(d)); }
}  // namespace

DensityPtr make_atom(const RandomVar& v, std::vector<ExprPtr> idx, RDist dist) {
  Density d;
  d.kind = DKind::Atom;
  d.var = v.id;
  d.var_name = v.name;
  d.idx = std::move(idx);
  d.dist = std::move(dist);
  return mk(std::move(d));
}

DensityPtr make_product(std::vector<DensityPtr> factors) {
  std::vector<DensityPtr> flat;
  for (auto& f : factors) {
    if (f->kind == DKind::Product) {
      flat.insert(flat.end(), f->factors.begin(), f->factors.end());
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (flat.size() == 1) return flat[0];
  Density d;
  d.kind = DKind::Product;
  d.factors = std::move(flat);
  return mk(std::move(d));
}

DensityPtr make_indexed_product(std::string index, ExprPtr lo, ExprPtr hi, DensityPtr body) {
  Density d;
  d.kind = DKind::IndexedProduct;
  d.index = std::move(index);
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  d.body = std::move(body);
  return mk(std::move(d));
}

DensityPtr make_recip(DensityPtr body) {
  Density d;
  d.kind = DKind::Recip;
  d.body = std::move(body);
  return mk(std::move(d));
}

DensityPtr make_integral(const RandomVar& v, std::vector<ExprPtr> idx, DensityPtr body) {
  Density d;
  d.kind = DKind::Integral;
  d.var = v.id;
  d.var_name = v.name;
  d.idx = std::move(idx);
  d.body = std::move(body);
  return mk(std::move(d));
}

DensityPtr make_guarded(std::vector<Pred> preds, DensityPtr body) {
  if (preds.empty()) return body;
  if (body->kind == DKind::Guarded) {
    std::vector<Pred> all = preds;
    all.insert(all.end(), body->preds.begin(), body->preds.end());
    Density d;
    d.kind = DKind::Guarded;
    d.preds = std::move(all);
    d.body = body->body;
    return mk(std::move(d));
  }
  Density d;
  d.kind = DKind::Guarded;
  d.preds = std::move(preds);
  d.body = std::move(body);
  return mk(std::move(d));
}

namespace {

bool equal_dist(const RDist& a, const RDist& b) {
  if (a.family != b.family) return false;
  if ((a.dim != nullptr) != (b.dim != nullptr)) return false;
  if (a.dim && !equal(a.dim, b.dim)) return false;
  if (a.vec.has_value() != b.vec.has_value()) return false;
  if (a.vec) {
    if (a.vec->kind != b.vec->kind || a.vec->id != b.vec->id) return false;
    if ((a.vec->row != nullptr) != (b.vec->row != nullptr)) return false;
    if (a.vec->row && !equal(a.vec->row, b.vec->row)) return false;
  }
  if (a.scalars.size() != b.scalars.size()) return false;
  for (std::size_t i = 0; i < a.scalars.size(); ++i) {
    if (!equal(a.scalars[i], b.scalars[i])) return false;
  }
  return true;
}

}  // namespace

bool equal(const DensityPtr& a, const DensityPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case DKind::Atom:
      if (a->var != b->var || a->idx.size() != b->idx.size()) return false;
      for (std::size_t i = 0; i < a->idx.size(); ++i) {
        if (!equal(a->idx[i], b->idx[i])) return false;
      }
      return equal_dist(a->dist, b->dist);
    case DKind::Product: {
      if (a->factors.size() != b->factors.size()) return false;
      for (std::size_t i = 0; i < a->factors.size(); ++i) {
        if (!equal(a->factors[i], b->factors[i])) return false;
      }
      return true;
    }
    case DKind::IndexedProduct:
      return a->index == b->index && equal(a->lo, b->lo) && equal(a->hi, b->hi) &&
             equal(a->body, b->body);
    case DKind::Recip: return equal(a->body, b->body);
    case DKind::Integral: {
      if (a->var != b->var || a->idx.size() != b->idx.size()) return false;
      for (std::size_t i = 0; i < a->idx.size(); ++i) {
        if (!equal(a->idx[i], b->idx[i])) return false;
      }
      return equal(a->body, b->body);
    }
    case DKind::Guarded: {
      if (a->preds.size() != b->preds.size()) return false;
      for (std::size_t i = 0; i < a->preds.size(); ++i) {
        if (!equal(a->preds[i], b->preds[i])) return false;
      }
      return equal(a->body, b->body);
    }
  }
  return false;
}

// --- rendering ---------------------------------------------------------------

namespace {

void render_subject(std::ostringstream& os, const Density& d) {
  os << d.var_name;
  if (!d.idx.empty()) {
    os << "[";
    for (std::size_t i = 0; i < d.idx.size(); ++i) {
      if (i) os << ", ";
      os << render(d.idx[i]);
    }
    os << "]";
  }
}

// Element references appearing in the distribution arguments, used to render
// the atom's condition set p(X | ...). Deterministic vectors are left out;
// they are constants of the model.
void collect_condition_refs(const ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == ExKind::VarElem) {
    std::string r = render(e);
    for (const auto& s : out) {
      if (s == r) r.clear();
    }
    if (!r.empty()) out.push_back(std::move(r));
    return;  // nested refs inside the subscript are part of this reference
  }
  for (const auto& k : e->kids) collect_condition_refs(k, out);
}

void render_to(std::ostringstream& os, const DensityPtr& d) {
  switch (d->kind) {
    case DKind::Atom: {
      std::vector<std::string> conds;
      if (d->dist.vec) {
        const auto& v = *d->dist.vec;
        if (v.kind == VecArg::Kind::VarWhole) conds.push_back(v.name);
        if (v.kind == VecArg::Kind::VarRow) {
          conds.push_back(v.name + "[" + render(v.row) + "]");
          collect_condition_refs(v.row, conds);
        }
      }
      for (const auto& s : d->dist.scalars) collect_condition_refs(s, conds);
      os << "p(";
      render_subject(os, *d);
      if (!conds.empty()) {
        os << " | ";
        for (std::size_t i = 0; i < conds.size(); ++i) {
          if (i) os << ", ";
          os << conds[i];
        }
      }
      os << ")";
      return;
    }
    case DKind::Product: {
      for (std::size_t i = 0; i < d->factors.size(); ++i) {
        if (i) os << " ";
        render_to(os, d->factors[i]);
      }
      return;
    }
    case DKind::IndexedProduct: {
      os << "prod_{";
      const bool zero_lo = d->lo->kind == ExKind::IntLit && d->lo->ival == 0;
      if (zero_lo) {
        os << d->index << "<" << render(d->hi);
      } else {
        os << render(d->lo) << "<=" << d->index << "<" << render(d->hi);
      }
      os << "} ";
      const bool wrap = d->body->kind == DKind::Product;
      if (wrap) os << "[";
      render_to(os, d->body);
      if (wrap) os << "]";
      return;
    }
    case DKind::Recip: {
      os << "1 / (";
      render_to(os, d->body);
      os << ")";
      return;
    }
    case DKind::Integral: {
      os << "integral_d";
      render_subject(os, *d);
      os << " (";
      render_to(os, d->body);
      os << ")";
      return;
    }
    case DKind::Guarded: {
      os << "{";
      render_to(os, d->body);
      os << "}_{";
      for (std::size_t i = 0; i < d->preds.size(); ++i) {
        if (i) os << " and ";
        os << render(d->preds[i]);
      }
      os << "}";
      return;
    }
  }
}

}  // namespace

std::string render(const DensityPtr& d) {
  std::ostringstream os;
  render_to(os, d);
  return os.str();
}

// --- queries -----------------------------------------------------------------

namespace {

void collect_expr_vars(const ExprPtr& e, std::vector<int>& out) { collect_var_ids(e, out); }

void collect_density_vars(const DensityPtr& d, std::vector<int>& out) {
  switch (d->kind) {
    case DKind::Atom: {
      out.push_back(d->var);
      for (const auto& i : d->idx) collect_expr_vars(i, out);
      if (d->dist.dim) collect_expr_vars(d->dist.dim, out);
      if (d->dist.vec) {
        if (d->dist.vec->kind != VecArg::Kind::Det) out.push_back(d->dist.vec->id);
        if (d->dist.vec->row) collect_expr_vars(d->dist.vec->row, out);
      }
      for (const auto& s : d->dist.scalars) collect_expr_vars(s, out);
      return;
    }
    case DKind::Product:
      for (const auto& f : d->factors) collect_density_vars(f, out);
      return;
    case DKind::IndexedProduct:
      collect_expr_vars(d->lo, out);
      collect_expr_vars(d->hi, out);
      collect_density_vars(d->body, out);
      return;
    case DKind::Recip: collect_density_vars(d->body, out); return;
    case DKind::Integral:
      out.push_back(d->var);
      collect_density_vars(d->body, out);
      return;
    case DKind::Guarded:
      for (const auto& p : d->preds) {
        collect_expr_vars(p.lhs, out);
        collect_expr_vars(p.rhs, out);
      }
      collect_density_vars(d->body, out);
      return;
  }
}

}  // namespace

std::set<std::string> free_vars(const DensityPtr& d, const CheckedModel& model) {
  std::vector<int> ids;
  collect_density_vars(d, ids);
  std::set<std::string> names;
  for (int id : ids) names.insert(model.vars[static_cast<std::size_t>(id)].name);
  return names;
}

bool mentions_var(const DensityPtr& d, int var) {
  std::vector<int> ids;
  collect_density_vars(d, ids);
  for (int id : ids) {
    if (id == var) return true;
  }
  return false;
}

namespace {

long long expr_nodes(const ExprPtr& e) {
  if (!e) return 0;
  long long n = 1;
  for (const auto& k : e->kids) n += expr_nodes(k);
  return n;
}

}  // namespace

long long node_count(const DensityPtr& d) {
  long long n = 1;
  switch (d->kind) {
    case DKind::Atom:
      for (const auto& i : d->idx) n += expr_nodes(i);
      if (d->dist.dim) n += expr_nodes(d->dist.dim);
      if (d->dist.vec && d->dist.vec->row) n += expr_nodes(d->dist.vec->row);
      for (const auto& s : d->dist.scalars) n += expr_nodes(s);
      return n;
    case DKind::Product:
      for (const auto& f : d->factors) n += node_count(f);
      return n;
    case DKind::IndexedProduct:
      return n + expr_nodes(d->lo) + expr_nodes(d->hi) + node_count(d->body);
    case DKind::Recip: return n + node_count(d->body);
    case DKind::Integral: {
      for (const auto& i : d->idx) n += expr_nodes(i);
      return n + node_count(d->body);
    }
    case DKind::Guarded: {
      for (const auto& p : d->preds) n += expr_nodes(p.lhs) + expr_nodes(p.rhs);
      return n + node_count(d->body);
    }
  }
  return n;
}

// --- lowering ----------------------------------------------------------------

static DensityPtr subst_density_index_impl(const DensityPtr& d, const std::string& index,
                                           const ExprPtr& value);

DensityPtr subst_density_index(const DensityPtr& d, const std::string& index,
                               const ExprPtr& value) {
  return subst_density_index_impl(d, index, value);
}

namespace {

// Builds the factor of one clause: the plate nest around the atom, with the
// innermost range narrowed by the clause guard (if/else on the plate index).
DensityPtr clause_factor(const RandomVar& v, const Clause& c) {
  std::vector<ExprPtr> idx;
  idx.reserve(v.plates.size());
  for (const auto& p : v.plates) idx.push_back(make_index(p.index));
  DensityPtr atom = make_atom(v, std::move(idx), c.dist);

  // Innermost level first.
  DensityPtr out = atom;
  for (std::size_t l = v.plates.size(); l-- > 0;) {
    const auto& p = v.plates[l];
    const bool innermost = l + 1 == v.plates.size();
    if (innermost && c.guard_value) {
      const ExprPtr& g = *c.guard_value;
      if (!c.guard_negated) {
        // Singleton range [g, g+1): instantiate directly.
        out = subst_density_index(out, p.index, g);
        continue;
      }
      // Complement: [0, g) and [g+1, count).
      ExprPtr gp1 = g->kind == ExKind::IntLit ? make_int(g->ival + 1)
                                              : make_bin(BinOp::Add, g, make_int(1));
      DensityPtr left =
          make_indexed_product(p.index, make_int(0), g, out);
      DensityPtr right = make_indexed_product(p.index, std::move(gp1), p.count, out);
      // Drop statically empty halves.
      std::vector<DensityPtr> parts;
      if (!(g->kind == ExKind::IntLit && g->ival <= 0)) parts.push_back(left);
      parts.push_back(right);
      out = parts.size() == 1 ? parts[0] : make_product(std::move(parts));
      continue;
    }
    out = make_indexed_product(p.index, make_int(0), p.count, out);
  }
  return out;
}

}  // namespace

static DensityPtr subst_density_index_impl(const DensityPtr& d, const std::string& index,
                                           const ExprPtr& value) {
  Density copy = *d;
  bool changed = false;
  auto sub_expr = [&](ExprPtr& e) {
    if (!e) return;
    ExprPtr n = subst_index(e, index, value);
    changed = changed || n != e;
    e = std::move(n);
  };
  switch (d->kind) {
    case DKind::Atom: {
      for (auto& i : copy.idx) sub_expr(i);
      if (copy.dist.dim) sub_expr(copy.dist.dim);
      if (copy.dist.vec && copy.dist.vec->row) sub_expr(copy.dist.vec->row);
      for (auto& s : copy.dist.scalars) sub_expr(s);
      break;
    }
    case DKind::Product: {
      for (auto& f : copy.factors) {
        DensityPtr n = subst_density_index_impl(f, index, value);
        changed = changed || n != f;
        f = std::move(n);
      }
      break;
    }
    case DKind::IndexedProduct: {
      sub_expr(copy.lo);
      sub_expr(copy.hi);
      if (copy.index != index) {  // shadowing
        DensityPtr n = subst_density_index_impl(copy.body, index, value);
        changed = changed || n != copy.body;
        copy.body = std::move(n);
      }
      break;
    }
    case DKind::Recip:
    case DKind::Integral: {
      for (auto& i : copy.idx) sub_expr(i);
      DensityPtr n = subst_density_index_impl(copy.body, index, value);
      changed = changed || n != copy.body;
      copy.body = std::move(n);
      break;
    }
    case DKind::Guarded: {
      for (auto& p : copy.preds) {
        sub_expr(p.lhs);
        sub_expr(p.rhs);
      }
      DensityPtr n = subst_density_index_impl(copy.body, index, value);
      changed = changed || n != copy.body;
      copy.body = std::move(n);
      break;
    }
  }
  if (!changed) return d;
  return std::make_shared<const Density>(std::move(copy));
}

JointDensity lower(const CheckedModel& model) {
  JointDensity j;
  std::vector<DensityPtr> factors;
  for (const auto& v : model.vars) {
    std::vector<DensityPtr> clause_factors;
    for (const auto& c : v.clauses) clause_factors.push_back(clause_factor(v, c));
    DensityPtr f = clause_factors.size() == 1 ? clause_factors[0]
                                              : make_product(std::move(clause_factors));
    j.var_factors.push_back(f);
    factors.push_back(std::move(f));
    j.var_order.push_back(v.id);
  }
  j.expr = make_product(std::move(factors));
  return j;
}

}  // namespace bnmc
