#include "bnmc/plan.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace bnmc;
using namespace bnmc::test;

namespace {

std::string describe_fixture(const std::string& name, Method method = Method::Gibbs) {
  const CheckedModel model = checked_fixture(name);
  const JointDensity joint = lower(model);
  std::vector<char> observed(model.vars.size(), 0);
  for (const auto& v : model.vars) observed[static_cast<std::size_t>(v.id)] = v.observed_in_model;
  const SamplerPlan plan = plan_inference(model, joint, method, observed);
  return describe_plan(model, joint, plan);
}

}  // namespace

TEST_CASE("describe output matches the checked-in derivations") {
  for (const std::string name : {"lda", "gmm", "naivebayes", "hmm"}) {
    CAPTURE(name);
    const std::string want = read_file(std::string(MODELS_DIR) + "/../tests/golden/describe_" +
                                       name + ".txt");
    CHECK(describe_fixture(name) == want);
  }
}

TEST_CASE("lda describe carries the published posteriors") {
  const std::string text = describe_fixture("lda");
  CHECK(text.find("theta[m] ~ Dirichlet(alpha + c)") != std::string::npos);
  CHECK(text.find("phi[k] ~ Dirichlet(beta + c)") != std::string::npos);
  CHECK(text.find("exact discrete") != std::string::npos);
}

TEST_CASE("regression describe diagnoses the metropolis fallback") {
  const std::string text = describe_fixture("regression");
  CHECK(text.find("w: no conjugate form found") != std::string::npos);
  CHECK(text.find("tau ~ InverseGamma(3 + n/2, 1 + rss/2)") != std::string::npos);
}
