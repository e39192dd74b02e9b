#include "pgss/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pgss/errors.hpp"

namespace pgss {

namespace {

void check_positive_finite(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw input_error(std::string(what) + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

void check_state(const FilterState& state) {
  check_positive_finite(state.shape, "filter shape");
  check_positive_finite(state.rate, "filter rate");
  if (state.time < 0) {
    throw input_error("filter time must be nonnegative, got " +
                      std::to_string(state.time));
  }
}

}  // namespace

ModelSpec::ModelSpec(double shape0, double rate0, double discount)
    : shape0_(shape0), rate0_(rate0), discount_(discount) {
  check_positive_finite(shape0, "prior shape");
  check_positive_finite(rate0, "prior rate");
  if (!(discount > 0.0) || !(discount < 1.0)) {
    throw input_error("discount must lie strictly inside (0,1), got " +
                      std::to_string(discount));
  }
}

FilterState initial_state(const ModelSpec& spec) {
  return FilterState{0, spec.shape0(), spec.rate0()};
}

FilterState propagate_prior(const FilterState& state, const ModelSpec& spec) {
  check_state(state);
  // Discounting a Gamma(a, b) posterior yields the Gamma(g*a, g*b) prior for
  // the next step; time still counts absorbed observations.
  return FilterState{state.time, spec.discount() * state.shape,
                     spec.discount() * state.rate};
}

FilterState update(const FilterState& state, std::int64_t y,
                   const ModelSpec& spec) {
  check_state(state);
  if (y < 0) {
    throw input_error("count must be nonnegative, got " + std::to_string(y));
  }
  const double g = spec.discount();
  return FilterState{state.time + 1, g * state.shape + static_cast<double>(y),
                     g * state.rate + 1.0};
}

double rate_closed_form(const ModelSpec& spec, std::int64_t t) {
  if (t < 0) {
    throw input_error("step count must be nonnegative, got " +
                      std::to_string(t));
  }
  const double g = spec.discount();
  const double gt = std::pow(g, static_cast<double>(t));
  return (1.0 - (1.0 - (1.0 - g) * spec.rate0()) * gt) / (1.0 - g);
}

double rate_fixed_point(const ModelSpec& spec) {
  return 1.0 / (1.0 - spec.discount());
}

NegBinPredictive::NegBinPredictive(double shape, double rate)
    : shape_(shape), rate_(rate) {
  check_positive_finite(shape, "predictive shape");
  check_positive_finite(rate, "predictive rate");
  log_success_ = std::log(rate) - std::log1p(rate);
  log_fail_ = -std::log1p(rate);
}

double NegBinPredictive::mean() const { return shape_ / rate_; }

double NegBinPredictive::variance() const {
  return shape_ * (rate_ + 1.0) / (rate_ * rate_);
}

double NegBinPredictive::prob_zero() const {
  return std::exp(shape_ * log_success_);
}

double NegBinPredictive::log_pmf(std::int64_t k) const {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return std::lgamma(kd + shape_) - std::lgamma(shape_) -
         std::lgamma(kd + 1.0) + shape_ * log_success_ + kd * log_fail_;
}

double NegBinPredictive::pmf(std::int64_t k) const {
  return k < 0 ? 0.0 : std::exp(log_pmf(k));
}

namespace {

// Terms below exp(-745) cannot move a double accumulator.
constexpr double kNegligibleLog = -745.0;

}  // namespace

double NegBinPredictive::cdf(std::int64_t k) const {
  if (k < 0) return 0.0;
  // Log-space pmf recurrence, accumulated linearly. Once past the mode with
  // negligible terms the remaining tail cannot change the sum.
  double logp = shape_ * log_success_;
  double cum = logp > kNegligibleLog ? std::exp(logp) : 0.0;
  const double m = mean();
  for (std::int64_t j = 1; j <= k; ++j) {
    logp += std::log((shape_ + static_cast<double>(j) - 1.0) /
                     static_cast<double>(j)) +
            log_fail_;
    if (logp > kNegligibleLog) {
      cum += std::exp(logp);
    } else if (static_cast<double>(j) > m) {
      break;
    }
  }
  return cum < 1.0 ? cum : 1.0;
}

std::int64_t NegBinPredictive::quantile(double q) const {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw input_error("quantile level must lie in (0,1), got " +
                      std::to_string(q));
  }
  constexpr std::int64_t kScanCap = 100000000;
  double logp = shape_ * log_success_;
  double cum = logp > kNegligibleLog ? std::exp(logp) : 0.0;
  const double m = mean();
  std::int64_t k = 0;
  while (cum < q) {
    ++k;
    logp += std::log((shape_ + static_cast<double>(k) - 1.0) /
                     static_cast<double>(k)) +
            log_fail_;
    if (logp > kNegligibleLog) {
      cum += std::exp(logp);
    } else if (static_cast<double>(k) > m) {
      // The tail left is below double resolution; k already covers q to
      // working precision.
      return k - 1;
    }
    if (k > kScanCap) {
      throw numeric_error("quantile scan exceeded " +
                          std::to_string(kScanCap) + " terms");
    }
  }
  return k;
}

std::int64_t NegBinPredictive::sample(RngStream& rng) const {
  return draw_poisson(draw_gamma(shape_, rate_, rng), rng);
}

NegBinPredictive one_step_predictive(const FilterState& state,
                                     const ModelSpec& spec) {
  check_state(state);
  const double g = spec.discount();
  return NegBinPredictive(g * state.shape, g * state.rate);
}

}  // namespace pgss
