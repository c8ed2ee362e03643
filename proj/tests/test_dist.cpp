#include <cmath>
#include <numeric>
#include <vector>

#include "bnmc/batch.hpp"
#include "bnmc/dist.hpp"
#include "bnmc/executor.hpp"
#include "bnmc/rng.hpp"
#include "doctest.h"

using namespace bnmc;

TEST_CASE("rng streams replay and separate") {
  RngStream a = RngStream::keyed(42, 1, 2, 3);
  RngStream b = RngStream::keyed(42, 1, 2, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c = RngStream::keyed(42, 1, 2, 4);
  RngStream d = RngStream::keyed(43, 1, 2, 3);
  a = RngStream::keyed(42, 1, 2, 3);
  CHECK(a.next_u64() != c.next_u64());
  CHECK(c.next_u64() != d.next_u64());

  RngStream u = RngStream::keyed(7);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.next_unit();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("executor reductions are worker-count invariant") {
  const std::int64_t n = 100001;
  std::vector<double> xs(n);
  RngStream r = RngStream::keyed(1);
  for (auto& x : xs) x = r.next_gaussian();

  auto run = [&](int workers) {
    ParallelExecutor pool(workers);
    return pool.reduce_sum(n, [&](std::int64_t lo, std::int64_t hi) {
      double s = 0.0;
      for (std::int64_t i = lo; i < hi; ++i) s += xs[static_cast<std::size_t>(i)];
      return s;
    });
  };
  const double s1 = run(1);
  const double s2 = run(2);
  const double s8 = run(8);
  CHECK(s1 == s2);  // bitwise
  CHECK(s1 == s8);

  ParallelExecutor pool(4);
  std::vector<int> hits(n, 0);
  pool.parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) hits[static_cast<std::size_t>(i)] += 1;
  });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == n);
  CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
  CHECK(*std::max_element(hits.begin(), hits.end()) == 1);

  std::vector<double> acc3(3, 0.0);
  pool.reduce_accumulate(n, 3, acc3.data(), [&](std::int64_t lo, std::int64_t hi, double* a) {
    for (std::int64_t i = lo; i < hi; ++i) {
      a[i % 3] += 1.0;
    }
  });
  CHECK(acc3[0] + acc3[1] + acc3[2] == doctest::Approx(static_cast<double>(n)));
}

TEST_CASE("log densities at known points") {
  CHECK(log_pdf_gaussian(0.0, 0.0, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  CHECK(log_pmf_bernoulli(1, 0.5) == doctest::Approx(std::log(0.5)));
  CHECK(log_pdf_uniform(0.5, 0.0, 2.0) == doctest::Approx(-std::log(2.0)));
  CHECK(log_pdf_gaussian(1.0, 0.0, -1.0) == -std::numeric_limits<double>::infinity());
  CHECK(log_pdf_beta(1.5, 2.0, 2.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(log_pdf_gaussian(std::nan(""), 0.0, 1.0), std::domain_error);
}

// Independent oracle: the Dirichlet density written directly from its
// closed form, sharing no code with the library implementation.
static double dirichlet_logpdf_oracle(const std::vector<double>& x, const std::vector<double>& a) {
  double t1 = 0.0, t2 = 0.0, asum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    t1 += (a[i] - 1.0) * std::log(x[i]);
    t2 += std::lgamma(a[i]);
    asum += a[i];
  }
  return t1 - t2 + std::lgamma(asum);
}

TEST_CASE("dirichlet log-pdf matches the closed-form oracle") {
  const std::vector<double> alpha{2.0, 3.0, 4.0};
  const std::vector<double> x{0.2, 0.3, 0.5};
  const double want = dirichlet_logpdf_oracle(x, alpha);
  CHECK(log_pdf_dirichlet(x, alpha) == doctest::Approx(want).epsilon(1e-12));

  RngStream r = RngStream::keyed(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(4), p(4);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      a[static_cast<std::size_t>(i)] = 0.2 + 3.0 * r.next_unit();
      p[static_cast<std::size_t>(i)] = 0.05 + r.next_unit();
      s += p[static_cast<std::size_t>(i)];
    }
    for (auto& v : p) v /= s;
    CHECK(log_pdf_dirichlet(p, a) ==
          doctest::Approx(dirichlet_logpdf_oracle(p, a)).epsilon(1e-12));
  }
}

TEST_CASE("degenerate categorical always draws the unit mass index") {
  const std::vector<double> p{1.0, 0.0};
  RngStream r = RngStream::keyed(9);
  for (int i = 0; i < 200; ++i) CHECK(draw_categorical(r, p) == 0);
}

TEST_CASE("monte carlo means match analytic values") {
  const int n = 100000;

  SUBCASE("dirichlet(1,1,1) component means are 1/3") {
    const std::vector<double> alpha{1.0, 1.0, 1.0};
    double mean[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
      RngStream r = RngStream::keyed(11, static_cast<std::uint64_t>(i));
      double out[3];
      draw_dirichlet(r, alpha, out);
      for (int k = 0; k < 3; ++k) mean[k] += out[k];
    }
    // Var of each component is 2/36 = 1/18; SE = sqrt(1/18/n).
    const double se = std::sqrt((1.0 / 18.0) / n);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(mean[k] / n - 1.0 / 3.0) < 3.0 * se);
    }
  }

  SUBCASE("gamma(1,1) mean is 1") {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      RngStream r = RngStream::keyed(13, static_cast<std::uint64_t>(i));
      s += draw_gamma(r, 1.0);
    }
    const double se = std::sqrt(1.0 / n);  // Var = shape = 1
    CHECK(std::abs(s / n - 1.0) < 3.0 * se);
  }

  SUBCASE("gamma with shape < 1 has the right mean") {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      RngStream r = RngStream::keyed(17, static_cast<std::uint64_t>(i));
      s += draw_gamma(r, 0.3);
    }
    const double se = std::sqrt(0.3 / n);
    CHECK(std::abs(s / n - 0.3) < 4.0 * se);
  }
}

TEST_CASE("draws stay in support across random parameters") {
  RngStream r = RngStream::keyed(23);
  for (int rep = 0; rep < 2000; ++rep) {
    RngStream draw = RngStream::keyed(29, static_cast<std::uint64_t>(rep));
    const double a = 0.1 + 5.0 * r.next_unit();
    const double b = 0.1 + 5.0 * r.next_unit();
    CHECK(draw_gamma(draw, a) > 0.0);
    const double bx = draw_beta(draw, a, b);
    CHECK(bx > 0.0);
    CHECK(bx < 1.0);
    CHECK(draw_inverse_gamma(draw, a, b) > 0.0);
    const double u = draw_uniform(draw, -b, a);
    CHECK(u >= -b);
    CHECK(u <= a);
    const long long c = draw_bernoulli(draw, r.next_unit());
    CHECK((c == 0 || c == 1));
  }
}

TEST_CASE("distribution parameter validation") {
  CHECK_THROWS_AS(Distribution::gaussian(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::dirichlet({1.0, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::categorical({0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::bernoulli(1.5), std::invalid_argument);
  const Distribution g = Distribution::gaussian(1.0, 4.0);
  CHECK(g.log_pdf(1.0) == doctest::Approx(-0.5 * std::log(2.0 * 3.141592653589793 * 4.0)));
}

TEST_CASE("dirichlet batch: strategies and worker counts agree bitwise") {
  const std::int64_t m = 12, v = 7;
  std::vector<double> alpha(static_cast<std::size_t>(v));
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = 0.3 + static_cast<double>(i);

  const RngStream key = RngStream::keyed(31, 0);
  auto run = [&](BatchStrategy strat, int workers) {
    BatchSpec spec;
    spec.rows = m;
    spec.cols = v;
    spec.alpha = alpha;
    spec.strategy = strat;
    ParallelExecutor pool(workers);
    std::vector<double> out(static_cast<std::size_t>(m * v));
    sample_dirichlet_batch(spec, key, pool, out);
    return out;
  };

  const auto row1 = run(BatchStrategy::RowParallel, 1);
  const auto row8 = run(BatchStrategy::RowParallel, 8);
  const auto col1 = run(BatchStrategy::ColumnParallel, 1);
  const auto col8 = run(BatchStrategy::ColumnParallel, 8);
  CHECK(row1 == row8);
  CHECK(row1 == col1);
  CHECK(row1 == col8);

  for (std::int64_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::int64_t c = 0; c < v; ++c) {
      const double x = row1[static_cast<std::size_t>(r * v + c)];
      CHECK(x > 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("dirichlet batch column means match alpha/sum(alpha)") {
  const std::int64_t m = 10000, v = 3;
  const std::vector<double> alpha{2.0, 3.0, 4.0};
  BatchSpec spec;
  spec.rows = m;
  spec.cols = v;
  spec.alpha = alpha;
  ParallelExecutor pool(2);
  std::vector<double> out(static_cast<std::size_t>(m * v));
  sample_dirichlet_batch(spec, RngStream::keyed(37), pool, out);
  const double a0 = 9.0;
  for (std::int64_t c = 0; c < v; ++c) {
    double s = 0.0;
    for (std::int64_t r = 0; r < m; ++r) s += out[static_cast<std::size_t>(r * v + c)];
    const double mean = alpha[static_cast<std::size_t>(c)] / a0;
    const double var = mean * (1.0 - mean) / (a0 + 1.0);
    const double se = std::sqrt(var / static_cast<double>(m));
    CHECK(std::abs(s / static_cast<double>(m) - mean) < 3.0 * se);
  }
}

TEST_CASE("auto strategy picks by row count and aspect ratio") {
  BatchSpec wide;  // few rows, very wide: the column scheme
  wide.rows = 20;
  wide.cols = 37276;
  CHECK(resolve_batch_strategy(wide, 32) == BatchStrategy::ColumnParallel);

  BatchSpec tall;  // many rows: one worker per row
  tall.rows = 48556;
  tall.cols = 20;
  CHECK(resolve_batch_strategy(tall, 32) == BatchStrategy::RowParallel);
  CHECK(resolve_batch_strategy(tall, 8) == BatchStrategy::RowParallel);
}

TEST_CASE("batch rejects bad parameters") {
  BatchSpec spec;
  spec.rows = 2;
  spec.cols = 2;
  const std::vector<double> bad{1.0, 0.0};
  spec.alpha = bad;
  ParallelExecutor pool(1);
  std::vector<double> out(4);
  CHECK_THROWS_AS(sample_dirichlet_batch(spec, RngStream::keyed(1), pool, out),
                  std::invalid_argument);
}
