#include <algorithm>
#include <functional>
#include <set>

#include "bnmc/model.hpp"

namespace bnmc {

namespace {

ExprPtr mk(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

class Checker {
 public:
  Checker(const ModelAst& ast, std::string name) : ast_(ast) { model_.name = std::move(name); }

  CheckedModel run() {
    for (const auto& h : ast_.hypers) {
      if (!names_.insert(h.name).second) fail("duplicate name '" + h.name + "'");
      model_.hyper_ix[h.name] = static_cast<int>(model_.hypers.size());
      model_.hypers.push_back(h);
    }
    for (const auto& d : ast_.decls) check_decl(d);
    for (const auto& o : ast_.observed) {
      if (!model_.var_ix.count(o)) {
        fail("observed name '" + o + "' is not a random variable");
      }
      model_.observed.push_back(o);
      model_.vars[static_cast<std::size_t>(model_.var_ix[o])].observed_in_model = true;
    }
    collect_cat_index_uses();
    return std::move(model_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw CheckError(msg); }

  // --- scope -----------------------------------------------------------------

  struct ScopeIndex {
    std::string name;
  };

  bool index_in_scope(const std::string& n) const {
    return std::find(plate_scope_.begin(), plate_scope_.end(), n) != plate_scope_.end() ||
           std::find(sum_scope_.begin(), sum_scope_.end(), n) != sum_scope_.end();
  }

  // --- expression resolution ---------------------------------------------------

  // What kinds of names an expression may reference.
  enum class Ctx { PlateBound, HyperOnly, General };

  ExprPtr resolve(const PExprPtr& e, Ctx ctx) {
    switch (e->kind) {
      case PExprKind::IntLit: return make_int(e->ival);
      case PExprKind::RealLit: return make_real(e->dval);
      case PExprKind::Ref: return resolve_ref(e->name, ctx);
      case PExprKind::Apply: return resolve_apply(e, ctx);
      case PExprKind::Bin: {
        BinOp op = e->op == PBinOp::Add ? BinOp::Add : e->op == PBinOp::Sub ? BinOp::Sub : BinOp::Mul;
        return make_bin(op, resolve(e->args[0], ctx), resolve(e->args[1], ctx));
      }
      case PExprKind::Pow:
      case PExprKind::Max:
      case PExprKind::Min: {
        BinOp op = e->kind == PExprKind::Pow ? BinOp::Pow
                   : e->kind == PExprKind::Max ? BinOp::Max
                                               : BinOp::Min;
        ExprPtr a = resolve(e->args[0], ctx);
        ExprPtr b = resolve(e->args[1], ctx);
        if (op != BinOp::Pow && (!a->is_int || !b->is_int)) {
          fail("max/min require integer operands");
        }
        return make_bin(op, std::move(a), std::move(b));
      }
      case PExprKind::Sum: {
        if (ctx != Ctx::General) fail("sum is not allowed in this context");
        if (index_in_scope(e->name) || names_.count(e->name)) {
          fail("sum index '" + e->name + "' shadows an existing name");
        }
        ExprPtr count = resolve(e->args[0], ctx);
        require_int(count, "sum bound");
        sum_scope_.push_back(e->name);
        ExprPtr body = resolve(e->args[1], ctx);
        sum_scope_.pop_back();
        Expr out;
        out.kind = ExKind::SumLoop;
        out.name = e->name;
        out.kids = {std::move(count), std::move(body)};
        out.is_int = false;
        return mk(std::move(out));
      }
    }
    fail("unresolvable expression");
  }

  void require_int(const ExprPtr& e, const char* what) const {
    if (!e->is_int) fail(std::string(what) + " must be integer-typed: " + render(e));
  }

  ExprPtr resolve_ref(const std::string& n, Ctx ctx) {
    if (index_in_scope(n)) return make_index(n);
    if (auto it = model_.hyper_ix.find(n); it != model_.hyper_ix.end()) {
      const auto& h = model_.hypers[static_cast<std::size_t>(it->second)];
      if (h.type == HyperType::IntArray) fail("int-array '" + n + "' must be indexed");
      Expr e;
      e.kind = ExKind::HyperScalar;
      e.id = it->second;
      e.name = n;
      e.is_int = h.type == HyperType::Int;
      return mk(std::move(e));
    }
    if (ctx == Ctx::PlateBound) {
      fail("plate bound must use hyperparameters and enclosing indices only: '" + n + "'");
    }
    if (auto it = model_.det_ix.find(n); it != model_.det_ix.end()) {
      const auto& d = model_.dets[static_cast<std::size_t>(it->second)];
      if (d.is_vector) fail("vector '" + n + "' cannot be used as a scalar");
      Expr e;
      e.kind = ExKind::DetScalar;
      e.id = it->second;
      e.name = n;
      return mk(std::move(e));
    }
    if (ctx == Ctx::HyperOnly) fail("only hyperparameters may appear here: '" + n + "'");
    if (auto it = model_.var_ix.find(n); it != model_.var_ix.end()) {
      const auto& v = model_.vars[static_cast<std::size_t>(it->second)];
      if (v.vector_elem) fail("vector-valued variable '" + n + "' cannot be used as a scalar");
      // A bare variable name denotes the element at the enclosing plate indices.
      Expr e;
      e.kind = ExKind::VarElem;
      e.id = it->second;
      e.name = n;
      e.is_int = v.is_int;
      for (const auto& p : v.plates) {
        if (!index_in_scope(p.index)) {
          fail("variable '" + n + "' used outside its plate; index '" + p.index +
               "' is not in scope");
        }
        e.kids.push_back(make_index(p.index));
      }
      return mk(std::move(e));
    }
    fail("undefined name '" + n + "'");
  }

  ExprPtr resolve_apply(const PExprPtr& a, Ctx ctx) {
    const std::string& n = a->name;
    if (auto it = model_.hyper_ix.find(n); it != model_.hyper_ix.end()) {
      const auto& h = model_.hypers[static_cast<std::size_t>(it->second)];
      if (h.type != HyperType::IntArray) fail("'" + n + "' is scalar and cannot be indexed");
      if (a->args.size() != 1) fail("'" + n + "' takes one subscript");
      ExprPtr ix = resolve(a->args[0], ctx);
      require_int(ix, "index expression");
      Expr e;
      e.kind = ExKind::HyperElem;
      e.id = it->second;
      e.name = n;
      e.is_int = true;
      e.kids = {std::move(ix)};
      return mk(std::move(e));
    }
    if (ctx == Ctx::PlateBound) fail("plate bound may only subscript int-array hyperparameters");
    if (auto it = model_.det_ix.find(n); it != model_.det_ix.end()) {
      const auto& d = model_.dets[static_cast<std::size_t>(it->second)];
      if (!d.is_vector) fail("scalar '" + n + "' cannot be indexed");
      if (a->args.size() != 1) fail("'" + n + "' takes one subscript");
      ExprPtr ix = resolve(a->args[0], ctx);
      require_int(ix, "index expression");
      Expr e;
      e.kind = ExKind::DetElem;
      e.id = it->second;
      e.name = n;
      e.kids = {std::move(ix)};
      return mk(std::move(e));
    }
    if (ctx == Ctx::HyperOnly) fail("only hyperparameters may appear here: '" + n + "'");
    if (auto it = model_.var_ix.find(n); it != model_.var_ix.end()) {
      const auto& v = model_.vars[static_cast<std::size_t>(it->second)];
      if (v.vector_elem) {
        fail("row of '" + n + "' can only be used as a distribution weight vector");
      }
      if (a->args.size() != v.plates.size()) {
        fail("'" + n + "' takes " + std::to_string(v.plates.size()) + " subscripts, got " +
             std::to_string(a->args.size()));
      }
      Expr e;
      e.kind = ExKind::VarElem;
      e.id = it->second;
      e.name = n;
      e.is_int = v.is_int;
      for (const auto& arg : a->args) {
        ExprPtr ix = resolve(arg, ctx);
        require_int(ix, "index expression");
        e.kids.push_back(std::move(ix));
      }
      return mk(std::move(e));
    }
    fail("undefined name '" + n + "'");
  }

  VecArg resolve_vec_arg(const PExprPtr& e) {
    if (e->kind == PExprKind::Ref) {
      if (auto it = model_.det_ix.find(e->name); it != model_.det_ix.end()) {
        const auto& d = model_.dets[static_cast<std::size_t>(it->second)];
        if (!d.is_vector) fail("'" + e->name + "' is not a vector");
        return {VecArg::Kind::Det, it->second, e->name, nullptr};
      }
      if (auto it = model_.var_ix.find(e->name); it != model_.var_ix.end()) {
        const auto& v = model_.vars[static_cast<std::size_t>(it->second)];
        if (!v.vector_elem || !v.plates.empty()) {
          fail("'" + e->name + "' is not a plain probability vector");
        }
        return {VecArg::Kind::VarWhole, it->second, e->name, nullptr};
      }
      fail("undefined name '" + e->name + "'");
    }
    if (e->kind == PExprKind::Apply) {
      auto it = model_.var_ix.find(e->name);
      if (it == model_.var_ix.end()) fail("undefined name '" + e->name + "'");
      const auto& v = model_.vars[static_cast<std::size_t>(it->second)];
      if (!v.vector_elem) fail("'" + e->name + "' does not have vector rows");
      if (v.plates.size() != 1 || e->args.size() != 1) {
        fail("row selection of '" + e->name + "' takes one subscript");
      }
      ExprPtr row = resolve(e->args[0], Ctx::General);
      require_int(row, "index expression");
      return {VecArg::Kind::VarRow, it->second, e->name, std::move(row)};
    }
    fail("distribution weight vector must be a named vector or row");
  }

  // --- declarations ------------------------------------------------------------

  void check_decl(const DeclAst& d) {
    if (!names_.insert(d.name).second) fail("duplicate name '" + d.name + "'");

    if (!d.random) {
      if (!d.plates.empty()) fail("deterministic declarations must be at top level");
      DetDecl det;
      det.name = d.name;
      det.id = static_cast<int>(model_.dets.size());
      if (d.det_vector) {
        det.is_vector = true;
        det.len = resolve(d.vec_len, Ctx::HyperOnly);
        require_int(det.len, "vector length");
        det.fill = resolve(d.vec_fill, Ctx::HyperOnly);
      } else {
        det.value = resolve(d.det_value, Ctx::HyperOnly);
      }
      model_.det_ix[d.name] = det.id;
      model_.dets.push_back(std::move(det));
      return;
    }

    RandomVar v;
    v.name = d.name;
    v.id = static_cast<int>(model_.vars.size());

    // Plates: explicit loops, then the implicit .sample(n) level.
    plate_scope_.clear();
    for (const auto& p : d.plates) {
      if (names_.count(p.index)) {
        fail("loop index '" + p.index + "' shadows an existing name");
      }
      if (index_in_scope(p.index)) fail("duplicate loop index '" + p.index + "'");
      ExprPtr count = resolve(p.count, Ctx::PlateBound);
      require_int(count, "plate bound");
      v.plates.push_back({p.index, std::move(count)});
      plate_scope_.push_back(p.index);
    }
    if (d.sample_count) {
      ExprPtr count = resolve(d.sample_count, Ctx::PlateBound);
      require_int(count, "sample count");
      const std::string idx = fresh_index_name();
      v.plates.push_back({idx, std::move(count)});
      plate_scope_.push_back(idx);
    }
    if (v.plates.size() > 2) fail("plate nesting deeper than 2 is not supported");

    // The value kind is known from the family alone; fix it before resolving
    // arguments so chain models can reference earlier elements of themselves.
    {
      Family fam;
      if (!lookup_family(d.clauses[0].dist.family, &fam)) {
        fail("unknown distribution family '" + d.clauses[0].dist.family + "'");
      }
      v.is_int = family_is_discrete(fam);
      v.vector_elem = fam == Family::Dirichlet;
    }

    const int id = v.id;
    model_.var_ix[v.name] = id;
    model_.vars.push_back(std::move(v));

    for (const auto& c : d.clauses) {
      Clause rc;
      if (c.guard_value) {
        ExprPtr val = resolve(*c.guard_value, Ctx::PlateBound);
        require_int(val, "if condition");
        rc.guard_value = std::move(val);
        rc.guard_negated = c.guard_negated;
      }
      rc.dist = resolve_dist(c.dist, model_.vars[static_cast<std::size_t>(id)]);
      model_.vars[static_cast<std::size_t>(id)].clauses.push_back(std::move(rc));
    }

    RandomVar& vv = model_.vars[static_cast<std::size_t>(id)];
    if (vv.clauses.size() > 1) {
      const auto& a = vv.clauses[0].dist;
      const auto& b = vv.clauses[1].dist;
      if (family_is_discrete(a.family) != family_is_discrete(b.family) ||
          (a.family == Family::Dirichlet) != (b.family == Family::Dirichlet)) {
        fail("if/else clauses of '" + vv.name + "' must draw values of the same kind");
      }
      if (a.dim && b.dim && !equal(a.dim, b.dim)) {
        fail("if/else clauses of '" + vv.name + "' must agree on the dimension");
      }
    }

    check_self_references(vv);
    plate_scope_.clear();
  }

  RDist resolve_dist(const DistRefAst& d, RandomVar& v) {
    RDist r;
    if (!lookup_family(d.family, &r.family)) fail("unknown distribution family '" + d.family + "'");
    switch (r.family) {
      case Family::Dirichlet:
      case Family::Categorical: {
        r.dim = resolve(d.args[0], Ctx::General);
        require_int(r.dim, "distribution dimension");
        r.vec = resolve_vec_arg(d.args[1]);
        break;
      }
      default:
        for (const auto& a : d.args) r.scalars.push_back(resolve(a, Ctx::General));
        break;
    }
    v.is_int = family_is_discrete(r.family);
    if (r.family == Family::Dirichlet) {
      v.vector_elem = true;
      v.elem_dim = r.dim;
    }
    return r;
  }

  // A variable may depend on itself only through strictly earlier elements of
  // the same plate (Markov chains): indices affine in the matching plate index
  // with negative offset.
  void check_self_references(const RandomVar& v) {
    std::vector<ExprPtr> exprs;
    for (const auto& c : v.clauses) {
      for (const auto& s : c.dist.scalars) exprs.push_back(s);
      if (c.dist.dim) exprs.push_back(c.dist.dim);
      if (c.dist.vec && c.dist.vec->row) exprs.push_back(c.dist.vec->row);
      if (c.dist.vec && c.dist.vec->kind != VecArg::Kind::Det && c.dist.vec->id == v.id) {
        fail("variable '" + v.name + "' cannot be its own weight vector");
      }
    }
    for (const auto& e : exprs) walk_self(e, v);
  }

  void walk_self(const ExprPtr& e, const RandomVar& v) {
    if (!e) return;
    if (e->kind == ExKind::VarElem && e->id == v.id) {
      if (e->kids.size() != v.plates.size()) fail("self-reference arity mismatch in '" + v.name + "'");
      bool strictly_earlier = false;
      for (std::size_t l = 0; l < e->kids.size(); ++l) {
        auto av = affine_view(e->kids[l]);
        if (!av || !av->base || av->base->kind != ExKind::BoundIndex ||
            av->base->name != v.plates[l].index || av->offset > 0) {
          fail("variable '" + v.name + "' may only reference earlier elements of itself");
        }
        strictly_earlier = strictly_earlier || av->offset < 0;
      }
      if (!strictly_earlier) {
        fail("variable '" + v.name + "' may not reference its own current element");
      }
    }
    for (const auto& k : e->kids) walk_self(k, v);
  }

  std::string fresh_index_name() {
    static const char* pool[] = {"k", "m", "n", "i", "j", "t", "r", "u", "a",
                                 "b", "c", "d", "e", "g", "h", "o", "p", "q"};
    for (const char* cand : pool) {
      if (!used_index_name(cand)) {
        taken_.insert(cand);
        return cand;
      }
    }
    for (int suffix = 2;; ++suffix) {
      std::string cand = "k" + std::to_string(suffix);
      if (!used_index_name(cand)) {
        taken_.insert(cand);
        return cand;
      }
    }
  }

  bool used_index_name(const std::string& n) const {
    if (names_.count(n) || taken_.count(n)) return true;
    for (const auto& d : ast_.decls) {
      for (const auto& p : d.plates) {
        if (p.index == n) return true;
      }
      if (uses_sum_index(d, n)) return true;
    }
    return false;
  }

  static bool uses_sum_index_expr(const PExprPtr& e, const std::string& n) {
    if (!e) return false;
    if (e->kind == PExprKind::Sum && e->name == n) return true;
    for (const auto& a : e->args) {
      if (uses_sum_index_expr(a, n)) return true;
    }
    return false;
  }

  static bool uses_sum_index(const DeclAst& d, const std::string& n) {
    for (const auto& c : d.clauses) {
      for (const auto& a : c.dist.args) {
        if (uses_sum_index_expr(a, n)) return true;
      }
    }
    return uses_sum_index_expr(d.det_value, n) || uses_sum_index_expr(d.vec_len, n) ||
           uses_sum_index_expr(d.vec_fill, n) || uses_sum_index_expr(d.sample_count, n);
  }

  // Records every integer-valued random variable used as an array subscript.
  void collect_cat_index_uses() {
    std::set<std::pair<std::string, std::string>> seen;
    auto note = [&](const ExprPtr& subscript, const std::string& array) {
      std::vector<int> ids;
      collect_var_ids(subscript, ids);
      for (int id : ids) {
        const auto& z = model_.vars[static_cast<std::size_t>(id)];
        if (z.is_int && seen.insert({z.name, array}).second) {
          model_.cat_index_uses.push_back({z.name, array});
        }
      }
    };
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
      if (!e) return;
      if (e->kind == ExKind::VarElem || e->kind == ExKind::DetElem || e->kind == ExKind::HyperElem) {
        for (const auto& k : e->kids) note(k, e->name);
      }
      for (const auto& k : e->kids) walk(k);
    };
    for (const auto& v : model_.vars) {
      for (const auto& c : v.clauses) {
        for (const auto& s : c.dist.scalars) walk(s);
        if (c.dist.dim) walk(c.dist.dim);
        if (c.dist.vec && c.dist.vec->row) {
          note(c.dist.vec->row, c.dist.vec->name);
          walk(c.dist.vec->row);
        }
      }
    }
  }

  const ModelAst& ast_;
  CheckedModel model_;
  std::set<std::string> names_;   // hypers, dets, vars
  std::set<std::string> taken_;   // generated index names
  std::vector<std::string> plate_scope_;
  std::vector<std::string> sum_scope_;
};

}  // namespace

CheckedModel validate_model(const ModelAst& ast, std::string name) {
  return Checker(ast, std::move(name)).run();
}

}  // namespace bnmc
