#include "pgss/analytics.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "pgss/errors.hpp"
#include "pgss/rng.hpp"
#include "pgss/simulate.hpp"

namespace pgss {

namespace {

void check_s(double s) {
  if (!(s >= -1.0) || !(s < 1.0)) {
    throw input_error("pgf argument must lie in [-1,1), got " +
                      std::to_string(s));
  }
}

void check_t(std::int64_t t) {
  if (t < 1) {
    throw input_error("step index must be >= 1, got " + std::to_string(t));
  }
}

// The t-step transform of the unit-shape model is a fold of one map along
// the no-data rate trajectory b^(k+1) = g*b^(k) + 1:
//
//   f_t(b^(k)) = [ f_{t-1}(b^(k+1)) * g*b / (g*b + 1 - f_{t-1}(b^(k+1))) ]^g
//
// with base row f_1(b) = (g*b / (g*b + 1 - s))^g. Everything below carries
// the complement q = 1 - f, which keeps full relative precision as f
// approaches 1; log1p/expm1 keep each fold exact to a few ulp of q.

double base_complement(double s, double rate, double g) {
  return -std::expm1(-g * std::log1p((1.0 - s) / (g * rate)));
}

double fold_complement(double q_next, double rate, double g) {
  return -std::expm1(
      g * (std::log1p(-q_next) - std::log1p(q_next / (g * rate))));
}

// The rate trajectory collapses onto its fixed point geometrically, so only
// a short prefix of columns ever differs from it. StripFold advances one
// full row of complements over that prefix plus a single collapsed-tail
// column: O(strip) memory at any horizon.
class StripFold {
 public:
  StripFold(double s, const ModelSpec& spec)
      : discount_(spec.discount()), t_(1) {
    const double g = discount_;
    const double fixed = 1.0 / (1.0 - g);
    constexpr std::int64_t kMaxStrip = 100000;
    double b = spec.rate0();
    while (std::abs(b - fixed) > 1e-12 * fixed &&
           std::ssize(rates_) < kMaxStrip) {
      rates_.push_back(b);
      const double next = g * b + 1.0;
      if (next == b) break;
      b = next;
    }
    tail_rate_ = b;
    q_.resize(rates_.size());
    for (std::size_t k = 0; k < rates_.size(); ++k) {
      q_[k] = base_complement(s, rates_[k], g);
    }
    tail_q_ = base_complement(s, tail_rate_, g);
  }

  void step() {
    // Ascending k reads the old q_[k+1] before it is overwritten.
    const std::size_t n = q_.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double next = (k + 1 < n) ? q_[k + 1] : tail_q_;
      q_[k] = fold_complement(next, rates_[k], discount_);
    }
    tail_q_ = fold_complement(tail_q_, tail_rate_, discount_);
    ++t_;
  }

  std::int64_t t() const { return t_; }
  double complement() const { return q_.empty() ? tail_q_ : q_[0]; }
  std::span<const double> rates() const { return rates_; }
  double tail_rate() const { return tail_rate_; }
  std::span<const double> row() const { return q_; }
  double tail_complement() const { return tail_q_; }

 private:
  double discount_;
  std::vector<double> rates_;
  double tail_rate_;
  std::vector<double> q_;
  double tail_q_;
  std::int64_t t_;
};

double unit_complement_at(double s, std::int64_t t, const ModelSpec& spec) {
  StripFold fold(s, spec);
  while (fold.t() < t) fold.step();
  return fold.complement();
}

}  // namespace

double pgf_unit_complement(double s, std::int64_t t, double rate0,
                           double discount) {
  check_s(s);
  check_t(t);
  return unit_complement_at(s, t, ModelSpec(1.0, rate0, discount));
}

double pgf_unit(double s, std::int64_t t, double rate0, double discount) {
  return 1.0 - pgf_unit_complement(s, t, rate0, discount);
}

double pgf(double s, std::int64_t t, const ModelSpec& spec) {
  check_s(s);
  check_t(t);
  // Shape enters only as a power of the unit-shape transform.
  const double q = unit_complement_at(
      s, t, ModelSpec(1.0, spec.rate0(), spec.discount()));
  return std::exp(spec.shape0() * std::log1p(-q));
}

ZeroProbTable::ZeroProbTable(const ModelSpec& spec, std::int64_t horizon)
    : spec_(spec), horizon_(horizon) {
  check_t(horizon);
  unit_complement_.reserve(horizon);
  StripFold fold(0.0, ModelSpec(1.0, spec.rate0(), spec.discount()));

  // Ordering checks run over the whole swept strip. Adjacent values can be
  // equal to rounding, so violations are only flagged beyond a relative
  // slack.
  const auto leq = [](double lo, double hi) {
    return lo <= hi + 1e-11 * hi + 1e-305;
  };
  std::vector<double> prev_row(fold.row().begin(), fold.row().end());
  double prev_tail = fold.tail_complement();
  const bool rates_ascending = fold.rates().empty()
                                   ? true
                                   : fold.rates().front() <= fold.tail_rate();

  const auto check_row = [&](bool compare_prev) {
    const auto row = fold.row();
    const double tail = fold.tail_complement();
    for (std::size_t k = 0; k + 1 <= row.size(); ++k) {
      const double cur = row[k];
      const double nxt = (k + 1 < row.size()) ? row[k + 1] : tail;
      // Higher rate means higher zero probability, i.e. smaller complement.
      const bool ok = rates_ascending ? leq(nxt, cur) : leq(cur, nxt);
      if (!ok) monotone_in_rate_ = false;
    }
    if (compare_prev) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (!leq(row[k], prev_row[k])) nondecreasing_in_t_ = false;
      }
      if (!leq(tail, prev_tail)) nondecreasing_in_t_ = false;
    }
    prev_row.assign(row.begin(), row.end());
    prev_tail = tail;
  };

  check_row(false);
  unit_complement_.push_back(fold.complement());
  while (fold.t() < horizon) {
    fold.step();
    check_row(true);
    unit_complement_.push_back(fold.complement());
  }
}

double ZeroProbTable::unit_complement(std::int64_t t) const {
  if (t < 1 || t > horizon_) {
    throw input_error("step index out of range: " + std::to_string(t));
  }
  return unit_complement_[t - 1];
}

double ZeroProbTable::unit_prob(std::int64_t t) const {
  return 1.0 - unit_complement(t);
}

double ZeroProbTable::log_zero_prob(std::int64_t t) const {
  return spec_.shape0() * std::log1p(-unit_complement(t));
}

double ZeroProbTable::zero_prob(std::int64_t t) const {
  return std::exp(log_zero_prob(t));
}

std::optional<std::int64_t> find_crossing_horizon(const ModelSpec& spec,
                                                  double threshold,
                                                  std::int64_t t_max) {
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw input_error("threshold must lie in (0,1), got " +
                      std::to_string(threshold));
  }
  check_t(t_max);
  const double log_threshold = std::log(threshold);
  StripFold fold(0.0, ModelSpec(1.0, spec.rate0(), spec.discount()));
  for (;;) {
    if (spec.shape0() * std::log1p(-fold.complement()) > log_threshold) {
      return fold.t();
    }
    if (fold.t() >= t_max) return std::nullopt;
    fold.step();
  }
}

MomentTrack variance_track(const ModelSpec& spec, std::int64_t horizon) {
  check_t(horizon);
  MomentTrack track;
  track.t.reserve(horizon);
  track.mean.reserve(horizon);
  track.shape_var.reserve(horizon);
  track.count_var.reserve(horizon);
  track.rate.reserve(horizon);

  const double g = spec.discount();
  const double mean = spec.shape0() / spec.rate0();
  double rate_prev = spec.rate0();  // b_{t-1}
  double shape_var = 0.0;           // V[a_{t-1}], zero at t = 1
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const double rate = g * rate_prev + 1.0;  // b_t
    const double count_var =
        shape_var / (rate_prev * rate_prev) + rate / (g * rate_prev) * mean;
    track.t.push_back(t);
    track.mean.push_back(mean);
    track.shape_var.push_back(shape_var);
    track.count_var.push_back(count_var);
    track.rate.push_back(rate);
    const double growth = rate / rate_prev;
    shape_var = growth * growth * shape_var + growth / g * mean;
    rate_prev = rate;
  }
  return track;
}

double predictive_mean(const ModelSpec& spec, std::int64_t t) {
  check_t(t);
  // The scaled shape a_t/b_t is a martingale, so every horizon keeps the
  // prior mean.
  return spec.shape0() / spec.rate0();
}

MonotoneReport check_monotone(const std::vector<double>& values, double tol) {
  MonotoneReport report;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double step = values[i + 1] - values[i];
    if (step <= 0.0) report.strictly_increasing = false;
    const double slack = tol * std::max(1.0, std::abs(values[i]));
    if (step < -slack) {
      report.nondecreasing = false;
      if (report.first_violation < 0) {
        report.first_violation = static_cast<std::int64_t>(i);
      }
    }
    if (step < report.worst_drop) report.worst_drop = step;
  }
  return report;
}

MonotoneReport check_monotone_in_rate(double discount, std::int64_t t,
                                      const std::vector<double>& rate_grid) {
  check_t(t);
  if (rate_grid.empty()) {
    throw input_error("rate grid must not be empty");
  }
  for (std::size_t i = 0; i + 1 < rate_grid.size(); ++i) {
    if (!(rate_grid[i] < rate_grid[i + 1])) {
      throw input_error("rate grid must be strictly ascending");
    }
  }
  std::vector<double> values;
  values.reserve(rate_grid.size());
  for (double rate : rate_grid) {
    values.push_back(pgf_unit(0.0, t, rate, discount));
  }
  return check_monotone(values, 1e-12);
}

MonotoneReport check_monotone_in_t(const ModelSpec& spec,
                                   std::int64_t horizon) {
  // Checked on negated complements: same ordering as the probabilities but
  // with full resolution once they are within rounding distance of 1.
  ZeroProbTable table(spec, horizon);
  std::vector<double> values;
  values.reserve(horizon);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    values.push_back(-table.unit_complement(t));
  }
  return check_monotone(values, 1e-12);
}

TowerCrossCheck tower_crosscheck(const ModelSpec& spec, std::int64_t t,
                                 std::int64_t t0, std::int64_t n_replicates,
                                 std::uint64_t seed) {
  check_t(t);
  if (t0 < 0) {
    throw input_error("conditioning length must be >= 0, got " +
                      std::to_string(t0));
  }
  TowerCrossCheck result;
  result.n_replicates = n_replicates;
  result.exact = ZeroProbTable(spec, t + t0).zero_prob(t + t0);
  if (t0 == 0) {
    // Degenerate split: nothing is conditioned on.
    result.mc_mean = result.exact;
    result.mc_se = 0.0;
    return result;
  }
  if (n_replicates < 2) {
    throw input_error("tower cross-check needs >= 2 replicates, got " +
                      std::to_string(n_replicates));
  }

  // Rate after t0 steps is deterministic; only the shape is random.
  double rate_t0 = spec.rate0();
  for (std::int64_t j = 0; j < t0; ++j) {
    rate_t0 = spec.discount() * rate_t0 + 1.0;
  }
  const double log_unit = std::log1p(-pgf_unit_complement(
      0.0, t, rate_t0, spec.discount()));

  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 0; i < n_replicates; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    FilterState state = initial_state(spec);
    for (std::int64_t j = 0; j < t0; ++j) {
      const std::int64_t y = one_step_predictive(state, spec).sample(rng);
      state = update(state, y, spec);
    }
    if (std::abs(state.rate - rate_t0) > 1e-9 * rate_t0) {
      throw internal_error("filter rate diverged from its closed form");
    }
    const double x = std::exp(state.shape * log_unit);
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  result.mc_mean = mean;
  result.mc_se = std::sqrt(m2 / static_cast<double>(n_replicates - 1) /
                           static_cast<double>(n_replicates));
  return result;
}

GapScanResult fixed_point_gap_scan(double discount, std::int64_t n_points) {
  if (!(discount > 0.0) || !(discount < 1.0)) {
    throw input_error("discount must lie strictly inside (0,1), got " +
                      std::to_string(discount));
  }
  if (n_points < 2) {
    throw input_error("gap scan needs >= 2 points, got " +
                      std::to_string(n_points));
  }
  const double g = discount;
  const double floor = std::exp(g / (1.0 - g) * std::log(g));
  const double gb = g / (1.0 - g);  // g * fixed-point rate

  // One application of the map to p = 1-q moves log p by
  //   gap(q) = (1-g)(-log1p(-q)) - g*log1p(q/gb),
  // positive gap means the iterate moved up. The grid is half uniform in p
  // over [floor, 1-1e-4] and half log-uniform in q over [1e-10, 1e-4], so
  // the vanishing-gap corner near p = 1 is densely covered.
  GapScanResult result;
  result.n_points = n_points;
  result.floor = floor;
  result.ok = true;
  result.min_gap = std::numeric_limits<double>::infinity();

  const std::int64_t half = n_points / 2;
  const auto eval = [&](double q) {
    const double gap =
        (1.0 - g) * (-std::log1p(-q)) - g * std::log1p(q / gb);
    if (gap < result.min_gap) {
      result.min_gap = gap;
      result.argmin_p = 1.0 - q;
    }
    if (!(gap > 0.0)) result.ok = false;
  };
  for (std::int64_t i = 0; i < half; ++i) {
    const double frac =
        static_cast<double>(i) / static_cast<double>(half - 1 > 0 ? half - 1 : 1);
    const double p = floor + (1.0 - 1e-4 - floor) * frac;
    eval(1.0 - p);
  }
  const double lo = std::log(1e-10);
  const double hi = std::log(1e-4);
  const std::int64_t rest = n_points - half;
  for (std::int64_t i = 0; i < rest; ++i) {
    const double frac =
        static_cast<double>(i) / static_cast<double>(rest - 1 > 0 ? rest - 1 : 1);
    eval(std::exp(lo + (hi - lo) * frac));
  }
  return result;
}

}  // namespace pgss
