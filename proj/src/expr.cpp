#include "bnmc/expr.hpp"

#include <sstream>

namespace bnmc {

ExprPtr make_int(long long v) {
  Expr e;
  e.kind = ExKind::IntLit;
  e.ival = v;
  e.is_int = true;
  return std::make_shared<const Expr>(std::move(e));
}

ExprPtr make_real(double v) {
  Expr e;
  e.kind = ExKind::RealLit;
  e.dval = v;
  return std::make_shared<const Expr>(std::move(e));
}

ExprPtr make_index(std::string name) {
  Expr e;
  e.kind = ExKind::BoundIndex;
  e.name = std::move(name);
  e.is_int = true;
  return std::make_shared<const Expr>(std::move(e));
}

ExprPtr make_bin(BinOp op, ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = ExKind::Bin;
  e.op = op;
  e.is_int = a->is_int && b->is_int && op != BinOp::Pow;
  e.kids = {std::move(a), std::move(b)};
  return std::make_shared<const Expr>(std::move(e));
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExKind::IntLit: return a->ival == b->ival;
    case ExKind::RealLit: return a->dval == b->dval;
    case ExKind::BoundIndex: return a->name == b->name;
    case ExKind::Bin:
      if (a->op != b->op) return false;
      break;
    case ExKind::SumLoop:
      if (a->name != b->name) return false;
      break;
    default:
      if (a->id != b->id) return false;
      break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i) {
    if (!equal(a->kids[i], b->kids[i])) return false;
  }
  return true;
}

namespace {

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return " + ";
    case BinOp::Sub: return " - ";
    case BinOp::Mul: return " * ";
    case BinOp::Pow: return "pow";
    case BinOp::Max: return "max";
    case BinOp::Min: return "min";
  }
  return "?";
}

void render_to(std::ostringstream& os, const ExprPtr& e, bool parens) {
  switch (e->kind) {
    case ExKind::IntLit: os << e->ival; return;
    case ExKind::RealLit: os << e->dval; return;
    case ExKind::HyperScalar:
    case ExKind::DetScalar:
    case ExKind::BoundIndex: os << e->name; return;
    case ExKind::HyperElem:
    case ExKind::DetElem: {
      os << e->name << "[";
      render_to(os, e->kids[0], false);
      os << "]";
      return;
    }
    case ExKind::VarElem: {
      os << e->name;
      if (!e->kids.empty()) {
        os << "[";
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
          if (i) os << ", ";
          render_to(os, e->kids[i], false);
        }
        os << "]";
      }
      return;
    }
    case ExKind::Bin: {
      if (e->op == BinOp::Pow || e->op == BinOp::Max || e->op == BinOp::Min) {
        os << op_text(e->op) << "(";
        render_to(os, e->kids[0], false);
        os << ", ";
        render_to(os, e->kids[1], false);
        os << ")";
        return;
      }
      if (parens) os << "(";
      render_to(os, e->kids[0], true);
      os << op_text(e->op);
      render_to(os, e->kids[1], true);
      if (parens) os << ")";
      return;
    }
    case ExKind::SumLoop: {
      os << "sum_{" << e->name << "<";
      render_to(os, e->kids[0], false);
      os << "} ";
      render_to(os, e->kids[1], true);
      return;
    }
  }
}

}  // namespace

std::string render(const ExprPtr& e) {
  std::ostringstream os;
  render_to(os, e, false);
  return os.str();
}

bool mentions_var(const ExprPtr& e, int var) {
  if (!e) return false;
  if (e->kind == ExKind::VarElem && e->id == var) return true;
  for (const auto& k : e->kids) {
    if (mentions_var(k, var)) return true;
  }
  return false;
}

ExprPtr subst_index(const ExprPtr& e, const std::string& index, const ExprPtr& value) {
  if (!e) return e;
  if (e->kind == ExKind::BoundIndex) return e->name == index ? value : e;
  if (e->kind == ExKind::SumLoop && e->name == index) return e;  // shadowed
  bool changed = false;
  std::vector<ExprPtr> kids;
  kids.reserve(e->kids.size());
  for (const auto& k : e->kids) {
    ExprPtr nk = subst_index(k, index, value);
    changed = changed || nk != k;
    kids.push_back(std::move(nk));
  }
  if (!changed) return e;
  Expr copy = *e;
  copy.kids = std::move(kids);
  return std::make_shared<const Expr>(std::move(copy));
}

ExprPtr subst_equal(const ExprPtr& e, const ExprPtr& from, const ExprPtr& to) {
  if (!e) return e;
  if (equal(e, from)) return to;
  bool changed = false;
  std::vector<ExprPtr> kids;
  kids.reserve(e->kids.size());
  for (const auto& k : e->kids) {
    ExprPtr nk = subst_equal(k, from, to);
    changed = changed || nk != k;
    kids.push_back(std::move(nk));
  }
  if (!changed) return e;
  Expr copy = *e;
  copy.kids = std::move(kids);
  return std::make_shared<const Expr>(std::move(copy));
}

void collect_var_ids(const ExprPtr& e, std::vector<int>& out) {
  if (!e) return;
  if (e->kind == ExKind::VarElem) out.push_back(e->id);
  for (const auto& k : e->kids) collect_var_ids(k, out);
}

std::string render(const Pred& p) {
  const char* op = "?";
  switch (p.op) {
    case CmpOp::Eq: op = " == "; break;
    case CmpOp::Ne: op = " != "; break;
    case CmpOp::Lt: op = " < "; break;
    case CmpOp::Le: op = " <= "; break;
    case CmpOp::Gt: op = " > "; break;
    case CmpOp::Ge: op = " >= "; break;
  }
  return render(p.lhs) + op + render(p.rhs);
}

bool equal(const Pred& a, const Pred& b) {
  return a.op == b.op && equal(a.lhs, b.lhs) && equal(a.rhs, b.rhs);
}

std::optional<AffineView> affine_view(const ExprPtr& e) {
  if (!e) return std::nullopt;
  if (e->kind == ExKind::IntLit) return AffineView{nullptr, e->ival};
  if (e->kind == ExKind::Bin && (e->op == BinOp::Add || e->op == BinOp::Sub)) {
    auto l = affine_view(e->kids[0]);
    auto r = affine_view(e->kids[1]);
    if (!l || !r) return std::nullopt;
    const long long sign = e->op == BinOp::Add ? 1 : -1;
    if (l->base && r->base) return std::nullopt;
    if (r->base && sign < 0) return std::nullopt;  // c - base: not affine in base
    AffineView out;
    out.base = l->base ? l->base : r->base;
    out.offset = l->offset + sign * r->offset;
    return out;
  }
  if (e->is_int) return AffineView{e, 0};
  return std::nullopt;
}

Truth decide(const Pred& p, const std::vector<IndexDomain>& domains) {
  auto l = affine_view(p.lhs);
  auto r = affine_view(p.rhs);
  if (!l || !r) return Truth::Unknown;

  auto verdict = [&](long long diff) {  // evaluates lhs - rhs = diff
    bool holds = false;
    switch (p.op) {
      case CmpOp::Eq: holds = diff == 0; break;
      case CmpOp::Ne: holds = diff != 0; break;
      case CmpOp::Lt: holds = diff < 0; break;
      case CmpOp::Le: holds = diff <= 0; break;
      case CmpOp::Gt: holds = diff > 0; break;
      case CmpOp::Ge: holds = diff >= 0; break;
    }
    return holds ? Truth::True : Truth::False;
  };

  const bool same_base = (!l->base && !r->base) ||
                         (l->base && r->base && equal(l->base, r->base));
  if (same_base) return verdict(l->offset - r->offset);

  // One side is an index with a known [0, hi) domain, the other a constant or
  // an expression sharing the domain's upper bound.
  auto domain_of = [&](const ExprPtr& base) -> const IndexDomain* {
    if (!base || base->kind != ExKind::BoundIndex) return nullptr;
    for (const auto& d : domains) {
      if (d.name == base->name) return &d;
    }
    return nullptr;
  };

  auto one_sided = [&](const AffineView& idx, const AffineView& other, bool idx_on_left) -> Truth {
    const IndexDomain* dom = domain_of(idx.base);
    if (!dom) return Truth::Unknown;
    // idx.base + idx.offset  vs  other
    // Known: 0 <= idx.base <= hi - 1.
    if (!other.base) {
      const long long c = other.offset - idx.offset;  // compare base vs c
      // base >= 0 always:
      CmpOp op = p.op;
      if (!idx_on_left) {
        // flip comparison
        switch (op) {
          case CmpOp::Lt: op = CmpOp::Gt; break;
          case CmpOp::Gt: op = CmpOp::Lt; break;
          case CmpOp::Le: op = CmpOp::Ge; break;
          case CmpOp::Ge: op = CmpOp::Le; break;
          default: break;
        }
      }
      switch (op) {
        case CmpOp::Ge: if (c <= 0) return Truth::True; break;
        case CmpOp::Gt: if (c < 0) return Truth::True; break;
        case CmpOp::Lt: if (c <= 0) return Truth::False; break;
        case CmpOp::Le: if (c < 0) return Truth::False; break;
        case CmpOp::Eq: if (c < 0) return Truth::False; break;
        case CmpOp::Ne: if (c < 0) return Truth::True; break;
      }
      return Truth::Unknown;
    }
    // Compare against the domain's own upper bound. With base <= hi - 1 the
    // worst case of (idx - other) is hiOff - 1 + idxOff - otherOff.
    auto hi = affine_view(dom->hi);
    if (!hi || !hi->base || !other.base || !equal(hi->base, other.base)) return Truth::Unknown;
    const long long slack = other.offset - idx.offset - hi->offset;
    CmpOp op = p.op;
    if (!idx_on_left) {
      switch (op) {
        case CmpOp::Lt: op = CmpOp::Gt; break;
        case CmpOp::Gt: op = CmpOp::Lt; break;
        case CmpOp::Le: op = CmpOp::Ge; break;
        case CmpOp::Ge: op = CmpOp::Le; break;
        default: break;
      }
    }
    switch (op) {
      case CmpOp::Lt: if (slack >= 0) return Truth::True; break;
      case CmpOp::Le: if (slack >= -1) return Truth::True; break;
      default: break;
    }
    return Truth::Unknown;
  };

  Truth t = one_sided(*l, *r, true);
  if (t != Truth::Unknown) return t;
  return one_sided(*r, *l, false);
}

}  // namespace bnmc
