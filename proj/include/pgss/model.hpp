#pragma once

#include <cstdint>

#include "pgss/rng.hpp"

namespace pgss {

// Hyperparameters of the count model: a Gamma(shape0, rate0) prior on the
// initial intensity and a discount factor in (0,1) that controls how fast
// the intensity forgets its past. Immutable once constructed.
class ModelSpec {
 public:
  ModelSpec(double shape0, double rate0, double discount);

  double shape0() const { return shape0_; }
  double rate0() const { return rate0_; }
  double discount() const { return discount_; }

 private:
  double shape0_;
  double rate0_;
  double discount_;
};

// Posterior of the intensity after `time` observations: Gamma(shape, rate).
// time == 0 is the prior itself.
struct FilterState {
  std::int64_t time = 0;
  double shape = 0.0;
  double rate = 0.0;
};

FilterState initial_state(const ModelSpec& spec);

// Discounted prior for the next step: Gamma(discount*shape, discount*rate).
FilterState propagate_prior(const FilterState& state, const ModelSpec& spec);

// Conjugate filter update on one observed count:
// shape <- discount*shape + y, rate <- discount*rate + 1.
FilterState update(const FilterState& state, std::int64_t y,
                   const ModelSpec& spec);

// Posterior rate after t steps in closed form,
//   b_t = (1 - (1 - (1-discount)*rate0) * discount^t) / (1 - discount),
// converging to the fixed point rate_fixed_point() = 1/(1-discount).
double rate_closed_form(const ModelSpec& spec, std::int64_t t);
double rate_fixed_point(const ModelSpec& spec);

// One-step-ahead predictive distribution of the next count given a filter
// state: a negative binomial with pgf
//   phi(s) = (rate / (rate + 1 - s))^shape,
// i.e. number-of-failures parameterization with success probability
// rate/(rate+1). For state (a, b) and discount g the parameters are
// (g*a, g*b).
class NegBinPredictive {
 public:
  NegBinPredictive(double shape, double rate);

  double shape() const { return shape_; }
  double rate() const { return rate_; }

  double mean() const;
  double variance() const;
  double prob_zero() const;

  double log_pmf(std::int64_t k) const;
  double pmf(std::int64_t k) const;
  double cdf(std::int64_t k) const;

  // Smallest y with cdf(y) >= q, for q in (0,1).
  std::int64_t quantile(double q) const;

  // Exact draw: Poisson mixed over a Gamma(shape, rate) intensity.
  std::int64_t sample(RngStream& rng) const;

 private:
  double shape_;
  double rate_;
  double log_success_;   // log(rate/(rate+1)), the pmf(0) exponent scale
  double log_fail_;      // log(1/(rate+1))
};

NegBinPredictive one_step_predictive(const FilterState& state,
                                     const ModelSpec& spec);

}  // namespace pgss
