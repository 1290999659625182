#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "edl/uncertainty.hpp"

using Catch::Matchers::WithinAbs;
using edl::DirichletParams;

TEST_CASE("mutual information") {
  REQUIRE_THAT(edl::mutual_information(DirichletParams({1.0, 1.0})),
               WithinAbs(std::log(2.0) - 0.5, 1e-12));
  // concentration kills the distributional spread
  REQUIRE(edl::mutual_information(DirichletParams(std::vector<double>(4, 1e6))) < 1e-5);
  REQUIRE_THAT(edl::mutual_information(DirichletParams({500.0, 500.0})),
               WithinAbs(5e-4, 2e-6));

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> a(0.2, 20.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> alpha(2 + i % 9);
    for (double& v : alpha) v = a(rng);
    REQUIRE(edl::mutual_information(DirichletParams(alpha)) >= -1e-12);
  }
}

TEST_CASE("asymptotic mutual information") {
  REQUIRE_THAT(edl::asymptotic_mi(DirichletParams(std::vector<double>(10, 2000.0))),
               WithinAbs(4.5e-4, 1e-15));
  REQUIRE_THAT(edl::asymptotic_mi(DirichletParams({1.0, 1.0})), WithinAbs(0.25, 1e-15));
  const DirichletParams d({3.0, 4.0, 5.0});
  const DirichletParams d2({6.0, 8.0, 10.0});
  REQUIRE_THAT(edl::asymptotic_mi(d2), WithinAbs(0.5 * edl::asymptotic_mi(d), 1e-15));
}

TEST_CASE("asymptotic error decays quadratically") {
  for (std::size_t k : {std::size_t{2}, std::size_t{10}}) {
    std::vector<double> errors;
    for (double s : {1e2, 1e3, 1e4}) {
      const DirichletParams d(std::vector<double>(k, s / static_cast<double>(k)));
      errors.push_back(std::abs(edl::mutual_information(d) - edl::asymptotic_mi(d)));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
      const double ratio = errors[i] / errors[i + 1];
      REQUIRE(ratio > 80.0);
      REQUIRE(ratio < 120.0);
    }
  }
}

TEST_CASE("variance sum") {
  REQUIRE_THAT(edl::variance_sum(DirichletParams({1.0, 1.0})), WithinAbs(1.0 / 6.0, 1e-15));
  // uniform alpha = (c,...,c): (1 - 1/K) / (S + 1)
  const std::size_t k_classes = 5;
  const double c = 3.0;
  REQUIRE_THAT(edl::variance_sum(DirichletParams(std::vector<double>(k_classes, c))),
               WithinAbs((1.0 - 1.0 / static_cast<double>(k_classes)) / (c * k_classes + 1.0),
                         1e-15));

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> a(0.2, 20.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> alpha(2 + i % 9);
    for (double& v : alpha) v = a(rng);
    const DirichletParams d(alpha);
    double per_component = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) per_component += edl::variance(d, k);
    REQUIRE_THAT(edl::variance_sum(d), WithinAbs(per_component, 1e-12));
  }
}

TEST_CASE("doubling alpha halves the variance sum at large strength") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> a(10.0, 40.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> alpha(4);
    for (double& v : alpha) v = a(rng);  // S >= 40
    std::vector<double> doubled(alpha);
    for (double& v : doubled) v *= 2.0;
    const double ratio = edl::variance_sum(DirichletParams(alpha)) /
                         edl::variance_sum(DirichletParams(doubled));
    REQUIRE(ratio > 1.9);
    REQUIRE(ratio < 2.1);
  }
}

TEST_CASE("score record") {
  const auto rec = edl::score(DirichletParams({3.0, 7.0}), 2.0);
  REQUIRE_THAT(rec.mp, WithinAbs(0.7, 1e-12));
  REQUIRE_THAT(rec.um, WithinAbs(0.2, 1e-12));
  REQUIRE(rec.mi >= 0.0);
  REQUIRE(rec.var_sum > 0.0);

  const auto vacuous = edl::score(DirichletParams(std::vector<double>(10, 1.0)), 10.0);
  REQUIRE_THAT(vacuous.um, WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(vacuous.mp, WithinAbs(0.1, 1e-12));
}

TEST_CASE("um, mi and var_sum rank strength sweeps identically") {
  const std::vector<double> direction = {0.1, 0.25, 0.3, 0.2, 0.15};
  const std::size_t n = 100;
  std::vector<double> um(n), mi(n), vs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::pow(10.0, 3.0 * static_cast<double>(i) / static_cast<double>(n - 1));
    std::vector<double> alpha(direction.size());
    for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] = s * direction[k];
    const auto rec = edl::score(DirichletParams(alpha), 2.0);
    um[i] = rec.um;
    mi[i] = rec.mi;
    vs[i] = rec.var_sum;
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
  };
  REQUIRE(ranks(um) == ranks(mi));
  REQUIRE(ranks(um) == ranks(vs));
}
