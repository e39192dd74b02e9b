#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "pgss/analytics.hpp"
#include "pgss/errors.hpp"
#include "pgss/model.hpp"
#include "pgss/simulate.hpp"
#include "support/stats.hpp"

using pgss::ModelSpec;
using pgss::ZeroProbTable;

namespace {

const ModelSpec kReference(6.5, 1.2, 0.75);

// Independent oracle: the full triangular recursion in plain probability
// space with pow, no strip, no complements. O(T^2), fine for small T.
std::vector<double> brute_zero_probs(double rate0, double g,
                                     std::int64_t horizon) {
  std::vector<double> rates(horizon);
  rates[0] = rate0;
  for (std::int64_t k = 1; k < horizon; ++k) {
    rates[k] = g * rates[k - 1] + 1.0;
  }
  std::vector<double> row(horizon);
  for (std::int64_t k = 0; k < horizon; ++k) {
    row[k] = std::pow(g * rates[k] / (g * rates[k] + 1.0), g);
  }
  std::vector<double> out;
  out.reserve(horizon);
  out.push_back(row[0]);
  for (std::int64_t t = 2; t <= horizon; ++t) {
    for (std::int64_t k = 0; k + t <= horizon; ++k) {
      const double inner = row[k + 1];
      row[k] = std::pow(
          inner * g * rates[k] / (g * rates[k] + 1.0 - inner), g);
    }
    out.push_back(row[0]);
  }
  return out;
}

}  // namespace

TEST_CASE("one-step transform matches the direct closed form") {
  for (double g : {0.3, 0.5, 0.75, 0.9}) {
    for (double b : {0.4, 1.2, 4.0, 9.0}) {
      for (double s : {-1.0, -0.4, 0.0, 0.6, 0.95}) {
        const double want = std::pow(g * b / (g * b + 1.0 - s), g);
        CHECK(pgss::pgf_unit(s, 1, b, g) ==
              doctest::Approx(want).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("two steps agree with one hand-applied fold") {
  for (double g : {0.3, 0.75, 0.9}) {
    for (double b : {0.5, 1.2, 1.0 / (1.0 - g)}) {
      const double b1 = g * b + 1.0;
      const double p1 = std::pow(g * b1 / (g * b1 + 1.0), g);
      const double want =
          std::pow(p1 * g * b / (g * b + 1.0 - p1), g);
      CHECK(pgss::pgf_unit(0.0, 2, b, g) ==
            doctest::Approx(want).epsilon(1e-13));
    }
  }
}

TEST_CASE("fixed-point rate reproduces the known one-step value") {
  for (double g : {0.1, 0.3, 0.5, 0.75, 0.9, 0.99}) {
    const double fixed = 1.0 / (1.0 - g);
    CHECK(pgss::pgf_unit(0.0, 1, fixed, g) ==
          doctest::Approx(std::pow(g, g)).epsilon(1e-13));
  }
}

TEST_CASE("strip table agrees with the triangular brute force") {
  for (double g : {0.3, 0.75, 0.9}) {
    for (double b0 : {0.5, 1.2, 4.0, 8.0}) {
      const std::int64_t horizon = 60;
      const auto brute = brute_zero_probs(b0, g, horizon);
      const ZeroProbTable table(ModelSpec(1.0, b0, g), horizon);
      for (std::int64_t t = 1; t <= horizon; ++t) {
        INFO("g ", g, " b0 ", b0, " t ", t);
        CHECK(table.unit_prob(t) ==
              doctest::Approx(brute[t - 1]).epsilon(1e-10));
      }
      CHECK(table.nondecreasing_in_t());
      CHECK(table.monotone_in_rate());
    }
  }
}

TEST_CASE("full-shape transform obeys the power law in the prior shape") {
  const std::vector<ModelSpec> specs = {kReference, ModelSpec(2.0, 0.5, 0.3),
                                        ModelSpec(0.7, 3.0, 0.9)};
  for (const ModelSpec& spec : specs) {
    for (double s : {-1.0, -0.5, 0.0, 0.5, 0.99}) {
      for (std::int64_t t : {1, 2, 5, 20}) {
        const double unit =
            pgss::pgf_unit(s, t, spec.rate0(), spec.discount());
        const double full = pgss::pgf(s, t, spec);
        CHECK(std::abs(spec.shape0() * std::log(unit) - std::log(full)) <
              1e-12);
      }
    }
  }
}

TEST_CASE("transform values stay inside (0,1] and approach 1 at s near 1") {
  const double q = pgss::pgf_unit_complement(1.0 - 1e-12, 10, 1.2, 0.75);
  CHECK(q > 0.0);
  CHECK(q < 1e-9);
  for (double s : {-1.0, 0.0, 0.9}) {
    const double p = pgss::pgf_unit(s, 30, 1.2, 0.75);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("zero-probability table matches the transform at s = 0") {
  const ZeroProbTable table(kReference, 40);
  for (std::int64_t t : {1, 3, 17, 40}) {
    CHECK(table.unit_prob(t) ==
          doctest::Approx(
              pgss::pgf_unit(0.0, t, kReference.rate0(),
                             kReference.discount()))
              .epsilon(1e-14));
    CHECK(table.zero_prob(t) ==
          doctest::Approx(pgss::pgf(0.0, t, kReference)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(table.unit_prob(0), pgss::input_error);
  CHECK_THROWS_AS(table.unit_prob(41), pgss::input_error);
}

TEST_CASE("table handles a prior rate exactly at the fixed point") {
  const ZeroProbTable table(ModelSpec(1.0, 4.0, 0.75), 50);
  CHECK(table.unit_prob(1) ==
        doctest::Approx(std::pow(0.75, 0.75)).epsilon(1e-13));
  CHECK(table.nondecreasing_in_t());
  CHECK(table.monotone_in_rate());
}

TEST_CASE("crossing horizon matches a table scan") {
  const std::int64_t horizon = 400;
  const ZeroProbTable table(kReference, horizon);
  std::int64_t want = -1;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    if (table.zero_prob(t) > 0.5) {
      want = t;
      break;
    }
  }
  REQUIRE(want > 0);
  const auto got = pgss::find_crossing_horizon(kReference, 0.5, horizon);
  REQUIRE(got.has_value());
  CHECK(*got == want);

  CHECK_FALSE(
      pgss::find_crossing_horizon(kReference, 0.999, 3).has_value());
  CHECK_THROWS_AS(pgss::find_crossing_horizon(kReference, 0.0, 10),
                  pgss::input_error);
  CHECK_THROWS_AS(pgss::find_crossing_horizon(kReference, 1.0, 10),
                  pgss::input_error);
}

TEST_CASE("variance track starts at the predictive and matches a hand t=2") {
  const pgss::MomentTrack track = pgss::variance_track(kReference, 10);
  const pgss::NegBinPredictive pred(4.875, 0.9);
  CHECK(track.mean[0] == doctest::Approx(6.5 / 1.2).epsilon(1e-15));
  CHECK(track.shape_var[0] == 0.0);
  CHECK(track.count_var[0] ==
        doctest::Approx(pred.variance()).epsilon(1e-13));

  // Hand expansion at t=2 from the one-step moments: with b1 = g*b0+1,
  // V[y2] = V[a1]/b1^2 + (b2/(g*b1)) * m where V[a1] = V[y1].
  const double g = 0.75, b0 = 1.2;
  const double b1 = g * b0 + 1.0;
  const double b2 = g * b1 + 1.0;
  const double m = 6.5 / 1.2;
  const double v1 = pred.variance();
  const double want2 = v1 / (b1 * b1) + b2 / (g * b1) * m;
  CHECK(track.count_var[1] == doctest::Approx(want2).epsilon(1e-13));
  CHECK(track.rate[0] == doctest::Approx(b1).epsilon(1e-15));
  CHECK(track.rate[1] == doctest::Approx(b2).epsilon(1e-15));
  for (std::size_t i = 0; i < track.mean.size(); ++i) {
    CHECK(track.mean[i] == track.mean[0]);
  }
  CHECK(pgss::predictive_mean(kReference, 137) ==
        doctest::Approx(6.5 / 1.2).epsilon(1e-15));
}

TEST_CASE("variance track agrees with a Monte Carlo ensemble") {
  const std::int64_t horizon = 6;
  const std::int64_t n = 200000;
  const pgss::PredictiveEnsemble ensemble = pgss::build_ensemble(
      kReference, horizon, n, 321, pgss::SamplerKind::chain, 1);
  const pgss::EnsembleSummary summary = pgss::summarize(ensemble, {});
  const pgss::MomentTrack track = pgss::variance_track(kReference, horizon);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    INFO("t ", t, " mc ", summary.variance[t - 1], " exact ",
         track.count_var[t - 1]);
    CHECK(std::abs(summary.variance[t - 1] / track.count_var[t - 1] - 1.0) <
          0.05);
  }
}

TEST_CASE("monotone report flags crafted sequences correctly") {
  const auto ok = pgss::check_monotone({1.0, 2.0, 2.0, 3.0}, 1e-12);
  CHECK(ok.nondecreasing);
  CHECK_FALSE(ok.strictly_increasing);
  CHECK(ok.first_violation == -1);

  const auto jitter =
      pgss::check_monotone({1.0, 1.0 - 1e-15, 2.0}, 1e-12);
  CHECK(jitter.nondecreasing);
  CHECK_FALSE(jitter.strictly_increasing);

  const auto bad = pgss::check_monotone({3.0, 1.0, 5.0}, 1e-12);
  CHECK_FALSE(bad.nondecreasing);
  CHECK(bad.first_violation == 0);
  CHECK(bad.worst_drop == doctest::Approx(-2.0));
}

TEST_CASE("zero probability is monotone in the prior rate and the horizon") {
  for (double g : {0.3, 0.5, 0.75, 0.9}) {
    const auto in_rate =
        pgss::check_monotone_in_rate(g, 10, {0.5, 1.0, 2.0, 4.0, 8.0});
    CHECK(in_rate.nondecreasing);
    const auto in_t = pgss::check_monotone_in_t(
        ModelSpec(6.5, 1.2, g), 300);
    CHECK(in_t.nondecreasing);
    CHECK(in_t.strictly_increasing);
  }
  CHECK_THROWS_AS(pgss::check_monotone_in_rate(0.75, 10, {2.0, 1.0}),
                  pgss::input_error);
  CHECK_THROWS_AS(pgss::check_monotone_in_rate(0.75, 10, {}),
                  pgss::input_error);
}

TEST_CASE("decomposition cross-check: degenerate and Monte Carlo splits") {
  const auto degenerate = pgss::tower_crosscheck(kReference, 7, 0, 100, 5);
  CHECK(degenerate.mc_mean == degenerate.exact);
  CHECK(degenerate.mc_se == 0.0);

  const auto split = pgss::tower_crosscheck(kReference, 3, 2, 30000, 97);
  INFO("exact ", split.exact, " mc ", split.mc_mean, " se ", split.mc_se);
  CHECK(split.mc_se > 0.0);
  CHECK(std::abs(split.exact - split.mc_mean) < 3.5 * split.mc_se);
}

TEST_CASE("gap scan certifies the absence of interior fixed points") {
  for (double g : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.75, 0.9}) {
    const auto scan = pgss::fixed_point_gap_scan(g, 20000);
    INFO("g ", g, " min gap ", scan.min_gap, " at ", scan.argmin_p);
    CHECK(scan.ok);
    CHECK(scan.min_gap > 0.0);
    CHECK(scan.floor ==
          doctest::Approx(std::pow(g, g / (1.0 - g))).epsilon(1e-13));
  }
  CHECK_THROWS_AS(pgss::fixed_point_gap_scan(1.0, 100), pgss::input_error);
  CHECK_THROWS_AS(pgss::fixed_point_gap_scan(0.5, 1), pgss::input_error);
}

TEST_CASE("transform argument domain is enforced") {
  CHECK_THROWS_AS(pgss::pgf_unit(1.0, 3, 1.2, 0.75), pgss::input_error);
  CHECK_THROWS_AS(pgss::pgf_unit(-1.5, 3, 1.2, 0.75), pgss::input_error);
  CHECK_THROWS_AS(pgss::pgf_unit(0.0, 0, 1.2, 0.75), pgss::input_error);
  CHECK_THROWS_AS(pgss::pgf_unit(0.0, 3, -1.0, 0.75), pgss::input_error);
  CHECK_THROWS_AS(pgss::pgf(std::nan(""), 3, kReference), pgss::input_error);
}
