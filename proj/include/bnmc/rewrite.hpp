#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnmc/density.hpp"

namespace bnmc {

// One site loop of a likelihood factor.
struct Binder {
  std::string index;
  ExprPtr lo, hi;
};

// One factor kept in a conditional's numerator after cancellation. A piece
// remembers both the rewritten density (for evaluation and rendering) and the
// original site structure (for sufficient-statistic recipes).
struct Piece {
  bool is_prior = false;  // the target variable's own factor
  bool dense = false;     // mentions the target in a non-separable way

  // Original site nest of the source factor, outermost first. Solved binders
  // are included; `solved_value[i]` is non-null for binders eliminated by
  // index arithmetic.
  std::vector<Binder> site_binders;
  std::vector<ExprPtr> solved_value;

  // Per target slot: the original index expression at the occurrence. Empty
  // for dense pieces and scalar targets.
  std::vector<ExprPtr> bin;

  // Guards of the rewritten piece: range-membership conditions over target
  // indices plus equality guards tying site expressions to target indices.
  std::vector<Pred> range_guards;
  std::vector<Pred> defining_guards;

  DensityPtr atom;        // original atom
  DensityPtr atom_subst;  // atom with solved binders replaced by target indices
  DensityPtr density;     // rendered piece (binders, guards, substituted atom)
};

// The full conditional of one variable: numerator holds exactly the Markov
// blanket factors of the target; everything else has been canceled.
struct ConditionalForm {
  int var = -1;
  std::vector<std::string> target_idx;      // fresh index names per plate slot
  std::vector<IndexDomain> target_domains;  // their [0, hi) domains
  std::vector<Piece> pieces;
  DensityPtr numerator;
  DensityPtr normalizer;  // integral over the target unless recognized later
};

// Derives the conditional of `var` from the joint by deterministic rewriting:
// factors not mentioning the target cancel, indexed products split at the
// target's position, and factors reaching the target through data-dependent
// subscripts are partitioned behind equality guards. Always succeeds.
ConditionalForm derive_conditional(const CheckedModel& model, const JointDensity& joint, int var);

// Closed-form posterior update detected on a conditional.
enum class PosteriorKind {
  DirichletCategorical,
  BetaBernoulli,
  GaussianMean,
  InverseGammaVariance,
  GammaPrecision,
};

const char* posterior_kind_name(PosteriorKind k);

// Sites contributing to a sufficient statistic: enumerate the binder nest,
// evaluate `bin` to find the target element a site updates, then fold in the
// site's child value (and mean/variance expressions where the family needs
// them).
struct SuffSite {
  std::vector<Binder> binders;
  std::vector<ExprPtr> bin;
  int child_var = -1;
  std::vector<ExprPtr> child_idx;
  ExprPtr mean;  // Gaussian child mean (InverseGamma/Gamma updates)
  ExprPtr var;   // Gaussian child variance (GaussianMean update)
};

struct ConjugateDraw {
  PosteriorKind kind;
  RDist prior;  // prior parameters in target view (indices bound per element)
  std::vector<SuffSite> sites;
};

// Tests the conditional against the conjugacy table
// (Dirichlet-Categorical, Beta-Bernoulli, Gaussian mean, InverseGamma
// variance, Gamma precision, in that order). Returns nothing when no rule
// matches.
std::optional<ConjugateDraw> detect_conjugacy(const CheckedModel& model,
                                              const ConditionalForm& cond);

}  // namespace bnmc
