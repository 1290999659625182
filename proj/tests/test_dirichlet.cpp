#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "edl/dirichlet.hpp"

using Catch::Matchers::WithinAbs;
using edl::CountVector;
using edl::DirichletParams;

TEST_CASE("parameter validation") {
  REQUIRE_THROWS_AS(DirichletParams({1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(DirichletParams({1.0, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(DirichletParams({1.0, -2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(DirichletParams({1.0, std::numeric_limits<double>::infinity()}),
                    std::invalid_argument);
  REQUIRE_NOTHROW(DirichletParams({0.01, 100.0}));
}

TEST_CASE("count vector") {
  REQUIRE_THROWS_AS(CountVector({1.0, -0.5}), std::invalid_argument);
  const CountVector y = CountVector::one_hot(3, 1);
  REQUIRE(y.is_one_hot());
  REQUIRE(y.hot_index() == 1);
  REQUIRE_FALSE(CountVector({0.0, 0.0}).is_one_hot());
  REQUIRE_FALSE(CountVector({1.0, 1.0}).is_one_hot());
  REQUIRE_FALSE(CountVector({0.5, 0.5}).is_one_hot());
  REQUIRE_THROWS_AS(CountVector({2.0, 0.0}).hot_index(), std::invalid_argument);
  REQUIRE_THROWS_AS(CountVector::one_hot(3, 3), std::out_of_range);
}

TEST_CASE("mean") {
  const auto m = edl::mean(DirichletParams({1.0, 1.0, 1.0}));
  for (double v : m) REQUIRE_THAT(v, WithinAbs(1.0 / 3.0, 1e-15));

  const auto m2 = edl::mean(DirichletParams({3.0, 7.0}));
  REQUIRE_THAT(m2[0], WithinAbs(0.3, 1e-15));
  REQUIRE_THAT(m2[1], WithinAbs(0.7, 1e-15));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> a(0.1, 30.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> alpha(2 + i % 9);
    for (double& v : alpha) v = a(rng);
    const auto mm = edl::mean(DirichletParams(alpha));
    double total = 0.0;
    for (double v : mm) {
      REQUIRE(v > 0.0);
      REQUIRE(v < 1.0);
      total += v;
    }
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("variance") {
  REQUIRE_THAT(edl::variance(DirichletParams({1.0, 1.0}), 0), WithinAbs(1.0 / 12.0, 1e-15));
  const DirichletParams sym({2.5, 2.5, 2.5, 2.5});
  for (std::size_t k = 1; k < 4; ++k) {
    REQUIRE(edl::variance(sym, k) == edl::variance(sym, 0));
  }
  REQUIRE_THAT(edl::variance(DirichletParams({1000.0, 1000.0}), 0),
               WithinAbs(1.2493753123438281e-4, 1e-15));
  REQUIRE_THROWS_AS(edl::variance(DirichletParams({1.0, 1.0}), 2), std::out_of_range);
}

TEST_CASE("expected log") {
  REQUIRE_THAT(edl::expected_log(DirichletParams({2.0, 1.0}), 0), WithinAbs(-0.5, 1e-12));
  REQUIRE_THAT(edl::expected_log(DirichletParams({1.0, 1.0}), 0), WithinAbs(-1.0, 1e-12));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> a(0.1, 30.0);
  for (int i = 0; i < 100; ++i) {
    const DirichletParams d({a(rng), a(rng), a(rng)});
    REQUIRE(edl::expected_log(d, i % 3) < 0.0);
  }
}

TEST_CASE("expected pi log pi") {
  REQUIRE_THAT(edl::expected_pi_log_pi(DirichletParams({1.0, 1.0}), 0), WithinAbs(-0.25, 1e-12));
  REQUIRE_THAT(edl::expected_pi_log_pi(DirichletParams({2.0, 1.0}), 0),
               WithinAbs(-2.0 / 9.0, 1e-12));
}

TEST_CASE("kl divergence") {
  const DirichletParams u({1.0, 1.0, 1.0});
  REQUIRE_THAT(edl::kl_divergence(u, u), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(edl::kl_divergence(DirichletParams({2.0, 1.0}), DirichletParams({1.0, 1.0})),
               WithinAbs(std::log(2.0) - 0.5, 1e-9));
  REQUIRE_THROWS_AS(edl::kl_divergence(u, DirichletParams({1.0, 1.0})), std::invalid_argument);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> a(0.2, 20.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> q(2 + i % 9), p(2 + i % 9);
    for (std::size_t k = 0; k < q.size(); ++k) {
      q[k] = a(rng);
      p[k] = a(rng);
    }
    REQUIRE(edl::kl_divergence(DirichletParams(q), DirichletParams(p)) >= 0.0);
  }
}

TEST_CASE("sampling moments") {
  std::mt19937_64 rng(10);
  const DirichletParams d({3.0, 7.0});
  const std::size_t n = 200000;
  double m0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto pi = edl::sample(d, rng);
    double total = 0.0;
    for (double v : pi) total += v;
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
    m0 += pi[0];
  }
  REQUIRE_THAT(m0 / static_cast<double>(n), WithinAbs(0.3, 3e-3));

  const DirichletParams flat({1.0, 1.0});
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = edl::sample(flat, rng)[0];
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / static_cast<double>(n);
  REQUIRE_THAT(acc2 / static_cast<double>(n) - mean * mean, WithinAbs(1.0 / 12.0, 2e-3));
}

TEST_CASE("conjugate update") {
  const DirichletParams post =
      edl::conjugate_update(DirichletParams({1.0, 2.0}), CountVector({3.0, 0.0}));
  REQUIRE(post[0] == 4.0);
  REQUIRE(post[1] == 2.0);

  const DirichletParams prior({2.0, 5.0});
  const DirichletParams same = edl::conjugate_update(prior, CountVector({0.0, 0.0}));
  REQUIRE(same == prior);

  // sequential updates accumulate
  const CountVector n1({1.5, 0.0}), n2({2.0, 3.0});
  const DirichletParams once =
      edl::conjugate_update(edl::conjugate_update(prior, n1), n2);
  const DirichletParams joint = edl::conjugate_update(prior, CountVector({3.5, 3.0}));
  REQUIRE(once == joint);
  REQUIRE_THROWS_AS(edl::conjugate_update(prior, CountVector({1.0, 2.0, 3.0})),
                    std::invalid_argument);
}

TEST_CASE("tempered update") {
  const DirichletParams post =
      edl::tempered_update(DirichletParams({1.0, 1.0, 1.0}), CountVector::one_hot(3, 1), 3.0);
  REQUIRE(post[0] == 1.0);
  REQUIRE(post[1] == 4.0);
  REQUIRE(post[2] == 1.0);

  const DirichletParams prior({2.0, 2.0});
  const CountVector y = CountVector::one_hot(2, 0);
  REQUIRE(edl::tempered_update(prior, y, 1.0) == edl::conjugate_update(prior, y));
  const DirichletParams half = edl::tempered_update(prior, y, 0.5);
  REQUIRE(half[0] == 2.5);
  REQUIRE(half[1] == 2.0);
  REQUIRE_THROWS_AS(edl::tempered_update(prior, y, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(edl::tempered_update(prior, y, -1.0), std::invalid_argument);
}

namespace {

// Grid identity on the 1-simplex: density of the updated parameters vs the
// normalized product prior * likelihood^tau, both normalized on the grid.
double grid_density_gap(const DirichletParams& prior, const CountVector& counts, double tau) {
  const std::size_t n = 20000;
  const double eps = 1e-6;
  const double h = (1.0 - 2.0 * eps) / static_cast<double>(n);
  const DirichletParams post = edl::tempered_update(prior, counts, tau);
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = eps + h * (static_cast<double>(i) + 0.5);
    const double lp = std::log(p), lq = std::log1p(-p);
    lhs[i] = std::exp((prior[0] - 1.0) * lp + (prior[1] - 1.0) * lq +
                      tau * (counts[0] * lp + counts[1] * lq));
    rhs[i] = std::exp((post[0] - 1.0) * lp + (post[1] - 1.0) * lq);
  }
  double ls = 0.0, rs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ls += lhs[i];
    rs += rhs[i];
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gap = std::max(gap, std::abs(lhs[i] / (ls * h) - rhs[i] / (rs * h)));
  }
  return gap;
}

}  // namespace

TEST_CASE("updates match grid-normalized posterior densities") {
  REQUIRE(grid_density_gap(DirichletParams({1.0, 1.0}), CountVector({2.0, 1.0}), 1.0) < 1e-4);
  for (double tau : {0.25, 3.0}) {
    REQUIRE(grid_density_gap(DirichletParams({1.5, 2.0}), CountVector::one_hot(2, 0), tau) <
            1e-4);
  }
}
