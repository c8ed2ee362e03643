#include <cmath>

#include "bnmc/bench.hpp"
#include "bnmc/data.hpp"
#include "bnmc/gen.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace bnmc;
using namespace bnmc::test;

TEST_CASE("rmse basics") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(rmse(a, a) == 0.0);

  const std::vector<double> pred{0.0, 0.0};
  const std::vector<double> target{3.0, 4.0};
  CHECK(rmse(pred, target) == doctest::Approx(std::sqrt(12.5)));

  const std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(rmse(a, shorter), std::invalid_argument);
  CHECK_THROWS_AS(rmse({}, {}), std::invalid_argument);
}

TEST_CASE("log predictive probability basics") {
  // Single doc, single token, one topic: log10 of that word's probability.
  const std::vector<double> phi{0.25, 0.75};
  const std::vector<double> theta{1.0};
  HeldoutCorpus one;
  one.docs = {{1}};
  CHECK(log_predictive_probability(phi, theta, 1, 2, one) ==
        doctest::Approx(std::log10(0.75)).epsilon(1e-12));

  // Uniform phi and theta over V=10: each token contributes -1.
  const long long K = 2, V = 10;
  std::vector<double> phi_u(static_cast<std::size_t>(K * V), 1.0 / static_cast<double>(V));
  std::vector<double> theta_u(static_cast<std::size_t>(2 * K), 0.5);
  HeldoutCorpus docs;
  docs.docs = {{0, 3, 9}, {5, 5}};
  CHECK(log_predictive_probability(phi_u, theta_u, K, V, docs) ==
        doctest::Approx(-5.0).epsilon(1e-12));

  // Out-of-vocabulary token.
  HeldoutCorpus oov;
  oov.docs = {{10}};
  CHECK_THROWS_AS(log_predictive_probability(phi_u, theta_u, K, V, oov),
                  std::invalid_argument);
}

TEST_CASE("metrics are pure functions") {
  const std::vector<double> pred{0.5, 1.5, -2.0};
  const std::vector<double> target{0.0, 1.0, -1.0};
  CHECK(rmse(pred, target) == rmse(pred, target));
}

TEST_CASE("bench csv shape") {
  CHECK(bench_csv({}) == "x,value,seconds\n");
  const std::string csv = bench_csv({{10.0, 0.5, 5.0}});
  CHECK(csv.find("x,value,seconds\n10,0.5,5\n") == 0);
}

TEST_CASE("data files round-trip byte-wise") {
  DataFile d;
  d.hyper.set_int("K", 3);
  d.hyper.set_real("l", -1.5);
  d.hyper.set_array("N", {2, 4});
  d.int_arrays["w"] = {0, 1, 2, 1, 0, 2};
  d.real_arrays["x"] = {0.5, -0.25, 3.0};

  const std::string once = serialize_data(d);
  const std::string twice = serialize_data(parse_data(once));
  CHECK(once == twice);

  CHECK_THROWS_AS(parse_data("{ not json"), RuntimeError);
}

TEST_CASE("generated corpora have consistent shapes") {
  const LdaCorpus corpus = gen_lda(6, 12, 3, 9, 2, 11);
  CHECK(corpus.true_phi.size() == 3 * 12);
  CHECK(corpus.train.int_arrays.at("w").size() == 6 * 9);
  CHECK(corpus.heldout_docs.docs.size() == 2);
  for (long long token : corpus.train.int_arrays.at("w")) {
    CHECK(token >= 0);
    CHECK(token < 12);
  }

  const RegressionTruth reg = gen_regression(20, 3, 0.1, 13);
  CHECK(reg.data.real_arrays.at("x").size() == 60);
  CHECK(reg.data.real_arrays.at("y").size() == 20);
  CHECK(reg.w.size() == 3);

  const DataFile text = corpus_from_text("a b a\nc a\n");
  CHECK(std::get<long long>(text.hyper.values.at("M")) == 2);
  CHECK(std::get<long long>(text.hyper.values.at("V")) == 3);
  CHECK(text.int_arrays.at("w") == std::vector<long long>{0, 1, 0, 2, 0});
}
