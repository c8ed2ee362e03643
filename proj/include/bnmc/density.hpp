#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "bnmc/model.hpp"

namespace bnmc {

// Symbolic density term: an atom p(X) / p(X | ...), a product, an indexed
// product over a range, a reciprocal, an integral, or a guarded term that
// contributes only where its predicates hold.
enum class DKind { Atom, Product, IndexedProduct, Recip, Integral, Guarded };

struct Density;
using DensityPtr = std::shared_ptr<const Density>;

struct Density {
  DKind kind;

  // Atom: p(var[idx] ~ dist); Integral: integration variable/element.
  int var = -1;
  std::string var_name;
  std::vector<ExprPtr> idx;
  RDist dist;

  // Product factors.
  std::vector<DensityPtr> factors;

  // IndexedProduct: prod over index in [lo, hi).
  std::string index;
  ExprPtr lo, hi;
  DensityPtr body;

  // Guarded: conjunction of predicates.
  std::vector<Pred> preds;
};

DensityPtr make_atom(const RandomVar& v, std::vector<ExprPtr> idx, RDist dist);
DensityPtr make_product(std::vector<DensityPtr> factors);  // flattens nested products
DensityPtr make_indexed_product(std::string index, ExprPtr lo, ExprPtr hi, DensityPtr body);
DensityPtr make_recip(DensityPtr body);
DensityPtr make_integral(const RandomVar& v, std::vector<ExprPtr> idx, DensityPtr body);
DensityPtr make_guarded(std::vector<Pred> preds, DensityPtr body);

bool equal(const DensityPtr& a, const DensityPtr& b);

// Substitutes a bound index throughout a term (instantiating a plate at a
// concrete or symbolic position).
DensityPtr subst_density_index(const DensityPtr& d, const std::string& index, const ExprPtr& value);

// Canonical, whitespace-normalized text form used by golden tests and the
// CLI describe command.
std::string render(const DensityPtr& d);

// Names of the random variables occurring anywhere in the term, including
// distribution arguments and guard predicates.
std::set<std::string> free_vars(const DensityPtr& d, const CheckedModel& model);

// True if the term mentions the variable at all (atom subject, argument, or
// predicate).
bool mentions_var(const DensityPtr& d, int var);

// Number of IR nodes (density nodes plus their expressions).
long long node_count(const DensityPtr& d);

struct JointDensity {
  DensityPtr expr;                      // product with one factor per clause
  std::vector<int> var_order;           // topological (declaration) order
  std::vector<DensityPtr> var_factors;  // factor of each random variable
};

// Lowers a checked model to its joint density: one factor per declaration,
// plate structure preserved as indexed products.
JointDensity lower(const CheckedModel& model);

}  // namespace bnmc
