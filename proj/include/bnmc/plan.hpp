#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnmc/rewrite.hpp"

namespace bnmc {

enum class Method { MH, Gibbs, MWG };

const char* method_name(Method m);
bool lookup_method(std::string_view name, Method* out);

enum class Strategy { Conjugate, ExactDiscrete, MHStep };

// One update step of a sweep: a whole variable family (or, for plain
// Metropolis-Hastings, every unobserved variable at once).
struct Block {
  Strategy strategy;
  std::vector<int> vars;
  bool parallelizable = true;
  bool one_at_a_time = false;  // Metropolis-within-Gibbs element scans
  std::shared_ptr<const ConditionalForm> cond;
  std::optional<ConjugateDraw> conj;
  std::vector<DensityPtr> blanket;  // joint factors entering the MH ratio
};

struct PlanConfig {
  double mh_scale = 0.5;  // random-walk proposal scale
};

struct SamplerPlan {
  Method method = Method::Gibbs;
  PlanConfig config;
  std::vector<Block> blocks;
  std::vector<std::string> diagnostics;
  long long ir_node_count = 0;  // symbolic size of joint + conditionals
};

// Derives a per-variable inference strategy. Gibbs assigns conjugate draws
// where the rewrite system finds them, exact enumeration for finite-support
// variables, and a Metropolis-Hastings fallback otherwise (with a
// diagnostic). Observed variables are never assigned a block.
SamplerPlan plan_inference(const CheckedModel& model, const JointDensity& joint, Method method,
                           const std::vector<char>& observed, const PlanConfig& config = {});

std::string render_conditional(const CheckedModel& model, const ConditionalForm& cond);

// The `describe` report: joint density, each variable's derived conditional,
// chosen strategy and parallelizability.
std::string describe_plan(const CheckedModel& model, const JointDensity& joint,
                          const SamplerPlan& plan);

}  // namespace bnmc
