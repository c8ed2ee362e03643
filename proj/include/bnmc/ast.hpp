#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bnmc {

// Surface syntax tree for .bn model files, produced by parse_model before any
// name resolution. See docs/model-language.md for the grammar.

enum class HyperType { Int, Real, IntArray };

struct HyperParam {
  std::string name;
  HyperType type;
};

enum class PExprKind { IntLit, RealLit, Ref, Apply, Bin, Pow, Max, Min, Sum };
enum class PBinOp { Add, Sub, Mul };

struct PExpr;
using PExprPtr = std::shared_ptr<const PExpr>;

struct PExpr {
  PExprKind kind;
  long long ival = 0;            // IntLit
  double dval = 0.0;             // RealLit
  std::string name;              // Ref / Apply / Sum bound index
  std::vector<PExprPtr> args;    // Apply subscripts; Bin/Pow/Max/Min operands; Sum {count, body}
  PBinOp op = PBinOp::Add;
};

bool equal(const PExprPtr& a, const PExprPtr& b);
std::string to_string(const PExprPtr& e);

struct DistRefAst {
  std::string family;
  std::vector<PExprPtr> args;
};

// One loop level enclosing a declaration: `for (index in 1..count)`.
struct PlateAst {
  std::string index;
  PExprPtr count;
};

// A random declaration may be split by an `if (index == value) ... else ...`
// on the innermost plate index; each arm contributes one clause.
struct ClauseAst {
  std::optional<PExprPtr> guard_value;  // innermost index == value
  bool guard_negated = false;           // true for the else arm
  DistRefAst dist;
};

struct DeclAst {
  std::string name;
  bool random = false;
  std::vector<PlateAst> plates;

  // random declarations
  std::vector<ClauseAst> clauses;
  PExprPtr sample_count;  // null for .sample()

  // deterministic declarations
  bool det_vector = false;
  PExprPtr vec_len, vec_fill;  // vector(len, fill)
  PExprPtr det_value;          // scalar expression
};

struct ModelAst {
  std::vector<HyperParam> hypers;
  std::vector<DeclAst> decls;
  std::vector<std::string> observed;  // in observe() order, duplicates removed
};

bool equal(const ModelAst& a, const ModelAst& b);

// Canonical source rendering; parses back to a structurally equal tree.
std::string pretty_print(const ModelAst& m);

}  // namespace bnmc
