#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "pgss/errors.hpp"
#include "pgss/rng.hpp"
#include "support/stats.hpp"

using pgss::RngStream;

TEST_CASE("streams are reproducible and pairwise distinct") {
  RngStream a(1234, 0), b(1234, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(1234, 1), d(1235, 0);
  RngStream base(1234, 0);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t r = base.next_u64();
    differs_stream |= (c.next_u64() != r);
    differs_seed |= (d.next_u64() != r);
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
}

TEST_CASE("uniform doubles stay inside the open interval") {
  RngStream rng(7, 0);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  // se of the mean is sqrt(1/12/n) ~ 2.9e-4
  CHECK(std::abs(sum / n - 0.5) < 3.0 * 2.9e-4);
}

TEST_CASE("normal draws have the right first two moments") {
  RngStream rng(11, 0);
  std::vector<double> draws(1000000);
  for (double& d : draws) d = rng.next_normal();
  const auto ms = test_stats::mean_sd(draws);
  CHECK(std::abs(ms.mean) < 3.0e-3);
  CHECK(std::abs(ms.sd * ms.sd - 1.0) < 5.0e-3);
}

TEST_CASE("gamma moments match at the reference prior") {
  RngStream rng(42, 0);
  const int n = 1000000;
  std::vector<double> draws(n);
  for (double& d : draws) d = pgss::draw_gamma(6.5, 1.2, rng);
  const auto ms = test_stats::mean_sd(draws);
  const double mean = 6.5 / 1.2;
  const double var = 6.5 / (1.2 * 1.2);
  CHECK(std::abs(ms.mean - mean) < 3.0 * std::sqrt(var / n));
  CHECK(std::abs(ms.sd * ms.sd - var) / var < 0.02);
}

TEST_CASE("gamma with shape below one stays positive with exact moments") {
  RngStream rng(43, 0);
  const int n = 1000000;
  std::vector<double> draws(n);
  for (double& d : draws) {
    d = pgss::draw_gamma(0.05, 2.0, rng);
    REQUIRE(d > 0.0);
  }
  const auto ms = test_stats::mean_sd(draws);
  const double mean = 0.05 / 2.0;
  const double var = 0.05 / 4.0;
  CHECK(std::abs(ms.mean - mean) < 4.0 * std::sqrt(var / n));
}

TEST_CASE("log-gamma draws agree with gamma draws in law") {
  RngStream rng(44, 0);
  const int n = 200000;
  std::vector<double> via_log(n);
  for (double& d : via_log) d = std::exp(pgss::draw_log_gamma(0.4, 3.0, rng));
  const auto ms = test_stats::mean_sd(via_log);
  const double mean = 0.4 / 3.0;
  const double var = 0.4 / 9.0;
  CHECK(std::abs(ms.mean - mean) < 4.0 * std::sqrt(var / n));
}

TEST_CASE("beta draws live strictly inside (0,1) with the right mean") {
  RngStream rng(45, 0);
  const int n = 1000000;
  const double alpha = 4.875, beta = 1.625;  // discounted reference shapes
  std::vector<double> draws(n);
  for (double& d : draws) {
    d = pgss::draw_beta(alpha, beta, rng);
    REQUIRE(d > 0.0);
    REQUIRE(d < 1.0);
  }
  const auto ms = test_stats::mean_sd(draws);
  const double mean = alpha / (alpha + beta);
  const double var = alpha * beta /
                     ((alpha + beta) * (alpha + beta) * (alpha + beta + 1.0));
  CHECK(std::abs(ms.mean - mean) < 3.0 * std::sqrt(var / n));
  // Tiny shapes exercise the log-space path.
  for (int i = 0; i < 1000; ++i) {
    const double d = pgss::draw_beta(1e-200, 3e-201, rng);
    REQUIRE(d > 0.0);
    REQUIRE(d < 1.0);
  }
}

namespace {

double poisson_pmf(double mean, std::int64_t k) {
  return std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

void gof_at_mean(double mean, std::uint64_t seed) {
  RngStream rng(seed, 0);
  const int n = 200000;
  std::vector<std::int64_t> draws(n);
  for (auto& d : draws) d = pgss::draw_poisson(mean, rng);
  const auto gof = test_stats::chi_square_gof(
      draws, [mean](std::int64_t k) { return poisson_pmf(mean, k); });
  INFO("mean ", mean, " chi2 ", gof.statistic, " df ", gof.df, " p ",
       gof.p_value);
  CHECK(gof.p_value > 1e-3);
}

}  // namespace

TEST_CASE("poisson passes goodness of fit in the inversion regime") {
  gof_at_mean(0.7, 50);
  gof_at_mean(3.7, 51);
}

TEST_CASE("poisson passes goodness of fit across the sampler switch") {
  gof_at_mean(9.5, 52);
  gof_at_mean(10.5, 53);
  gof_at_mean(64.0, 54);
}

TEST_CASE("poisson at huge mean keeps exact moments") {
  RngStream rng(55, 0);
  const int n = 20000;
  const double mean = 1e9;
  std::vector<std::int64_t> draws(n);
  for (auto& d : draws) d = pgss::draw_poisson(mean, rng);
  const auto ms = test_stats::mean_sd(draws);
  CHECK(std::abs(ms.mean - mean) < 4.0 * std::sqrt(mean / n));
  CHECK(std::abs(ms.sd * ms.sd / mean - 1.0) < 0.05);
}

TEST_CASE("poisson at vanishing mean is almost surely zero") {
  RngStream rng(56, 0);
  for (int i = 0; i < 100000; ++i) {
    CHECK(pgss::draw_poisson(1e-12, rng) == 0);
  }
}

TEST_CASE("invalid arguments are rejected") {
  RngStream rng(1, 0);
  CHECK_THROWS_AS(pgss::draw_gamma(0.0, 1.0, rng), pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_gamma(-1.0, 1.0, rng), pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_gamma(1.0, 0.0, rng), pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_gamma(std::nan(""), 1.0, rng),
                  pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_beta(0.0, 1.0, rng), pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_beta(1.0, -2.0, rng), pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_poisson(0.0, rng), pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_poisson(-3.0, rng), pgss::input_error);
  CHECK_THROWS_AS(pgss::draw_poisson(1e16, rng), pgss::numeric_error);
}
