#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnmc/ast.hpp"
#include "bnmc/dist.hpp"
#include "bnmc/expr.hpp"

namespace bnmc {

struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Weight-vector argument of a Dirichlet or Categorical: a deterministic
// vector, a whole vector-valued variable, or one row of a matrix variable.
struct VecArg {
  enum class Kind { Det, VarWhole, VarRow };
  Kind kind;
  int id = -1;
  std::string name;
  ExprPtr row;  // VarRow only
};

// Resolved distribution reference.
struct RDist {
  Family family;
  ExprPtr dim;                 // Dirichlet/Categorical dimension
  std::optional<VecArg> vec;   // Dirichlet/Categorical weights
  std::vector<ExprPtr> scalars;
};

struct Plate {
  std::string index;
  ExprPtr count;  // may reference enclosing plate indices (ragged)
};

// One distribution clause of a random variable; multi-clause variables come
// from if/else splits on the innermost plate index.
struct Clause {
  std::optional<ExprPtr> guard_value;  // innermost index == value
  bool guard_negated = false;
  RDist dist;
};

struct RandomVar {
  std::string name;
  int id = -1;
  std::vector<Plate> plates;  // includes the implicit .sample(n) plate, if any
  bool is_int = false;        // Categorical/Bernoulli draws
  bool vector_elem = false;   // Dirichlet draws: each element is a row
  ExprPtr elem_dim;           // row width when vector_elem
  std::vector<Clause> clauses;
  bool observed_in_model = false;
};

struct DetDecl {
  std::string name;
  int id = -1;
  bool is_vector = false;
  ExprPtr len, fill;  // vector(len, fill)
  ExprPtr value;      // scalar
};

// A categorical-valued variable used to index into an array ("z indexes phi"),
// the trigger for the partition rewrite.
struct CatIndexUse {
  std::string indexer;  // integer-valued random variable
  std::string array;    // variable it selects into
};

struct CheckedModel {
  std::string name = "model";
  std::vector<HyperParam> hypers;
  std::vector<DetDecl> dets;
  std::vector<RandomVar> vars;
  std::vector<std::string> observed;
  std::vector<CatIndexUse> cat_index_uses;

  std::unordered_map<std::string, int> hyper_ix, det_ix, var_ix;

  const RandomVar* find_var(const std::string& n) const {
    auto it = var_ix.find(n);
    return it == var_ix.end() ? nullptr : &vars[static_cast<std::size_t>(it->second)];
  }
  bool is_observed(const std::string& n) const {
    for (const auto& o : observed) {
      if (o == n) return true;
    }
    return false;
  }
};

// Verifies scoping, typing and structural invariants of the parsed model and
// resolves every name. Throws CheckError with a human-readable message.
CheckedModel validate_model(const ModelAst& ast, std::string name = "model");

}  // namespace bnmc
