#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bnmc {

// Name-resolved expressions shared by the checked model and the density IR.
// Immutable after construction; subtrees are shared freely across threads.

enum class ExKind {
  IntLit,
  RealLit,
  HyperScalar,  // id = hyper position
  HyperElem,    // id = hyper position (int array), kids[0] = index
  BoundIndex,   // plate or sum index, referenced by name
  DetScalar,    // id = deterministic decl position
  DetElem,      // id = deterministic decl position, kids[0] = index
  VarElem,      // id = random var position, kids = element indices
  Bin,          // kids = {lhs, rhs}
  SumLoop,      // bound over [0, count): kids = {count, body}
};

enum class BinOp { Add, Sub, Mul, Pow, Max, Min };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExKind kind;
  long long ival = 0;
  double dval = 0.0;
  int id = -1;
  std::string name;  // symbol name (for rendering), or bound index name
  BinOp op = BinOp::Add;
  std::vector<ExprPtr> kids;
  bool is_int = false;
};

ExprPtr make_int(long long v);
ExprPtr make_real(double v);
ExprPtr make_index(std::string name);
ExprPtr make_bin(BinOp op, ExprPtr a, ExprPtr b);

bool equal(const ExprPtr& a, const ExprPtr& b);
std::string render(const ExprPtr& e);

// True if the expression contains a VarElem of the given variable.
bool mentions_var(const ExprPtr& e, int var);

// Replaces every occurrence of a bound index name with an expression.
ExprPtr subst_index(const ExprPtr& e, const std::string& index, const ExprPtr& value);

// Replaces every subtree structurally equal to `from` with `to`.
ExprPtr subst_equal(const ExprPtr& e, const ExprPtr& from, const ExprPtr& to);

void collect_var_ids(const ExprPtr& e, std::vector<int>& out);

// Comparison predicate over integer expressions, used in density guards.
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Pred {
  CmpOp op;
  ExprPtr lhs, rhs;
};

std::string render(const Pred& p);
bool equal(const Pred& a, const Pred& b);

// Affine view of an integer expression: base + offset with an optional
// symbolic base. Used to simplify guards like (m + 1 != m).
struct AffineView {
  ExprPtr base;  // null for pure constants
  long long offset = 0;
};
std::optional<AffineView> affine_view(const ExprPtr& e);

enum class Truth { True, False, Unknown };

// Decides a predicate statically when both sides share an affine base or are
// constants; `domains` supplies known [0, hi) bounds for free indices.
struct IndexDomain {
  std::string name;
  ExprPtr hi;  // index ranges over [0, hi)
};
Truth decide(const Pred& p, const std::vector<IndexDomain>& domains);

}  // namespace bnmc
