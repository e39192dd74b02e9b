#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgss/model.hpp"

namespace pgss {

// t-step-ahead pgf of the count, evaluated by folding the one-step pgf
// backward along the deterministic rate trajectory b^(k) = rate after k
// filter steps with no data. Valid for s in [-1, 1).
//
// pgf_unit fixes shape0 = 1; the general transform obeys the power law
//   pgf(s, t, {a0, b0, g}) = pgf_unit(s, t, b0, g)^a0.
double pgf_unit(double s, std::int64_t t, double rate0, double discount);
double pgf(double s, std::int64_t t, const ModelSpec& spec);

// Same fold carried in the complement q = 1 - value, which keeps full
// relative precision when the pgf is within rounding distance of 1 (the
// regime every large-t question lives in).
double pgf_unit_complement(double s, std::int64_t t, double rate0,
                           double discount);

// P[count at step t is zero] for t = 1..horizon, stored as unit-shape
// complements q_t = 1 - p_t(rate0). The fold works on a fixed strip of the
// rate trajectory (the trajectory collapses geometrically onto its fixed
// point, so only the first ~hundred columns ever differ from it), giving
// O(horizon * strip) time and O(strip) memory.
class ZeroProbTable {
 public:
  ZeroProbTable(const ModelSpec& spec, std::int64_t horizon);

  std::int64_t horizon() const { return horizon_; }
  const ModelSpec& spec() const { return spec_; }

  double unit_complement(std::int64_t t) const;  // 1 - p_t(rate0)
  double unit_prob(std::int64_t t) const;        // p_t(rate0)
  double zero_prob(std::int64_t t) const;        // p_t(rate0)^shape0
  double log_zero_prob(std::int64_t t) const;

  // Monotonicity observed across the whole swept strip (not just the rate0
  // column): probabilities nondecreasing in t per column, and ordered along
  // each row consistently with the rate ordering. Violations beyond a
  // 1e-12 tolerance indicate a defect.
  bool nondecreasing_in_t() const { return nondecreasing_in_t_; }
  bool monotone_in_rate() const { return monotone_in_rate_; }

 private:
  ModelSpec spec_;
  std::int64_t horizon_;
  std::vector<double> unit_complement_;  // index t-1
  bool nondecreasing_in_t_ = true;
  bool monotone_in_rate_ = true;
};

// Smallest t <= t_max with zero_prob(t) > threshold, using the same strip
// fold without storing the table. nullopt if no crossing by t_max.
std::optional<std::int64_t> find_crossing_horizon(const ModelSpec& spec,
                                                  double threshold,
                                                  std::int64_t t_max);

// Exact predictive moments per step. mean is constant shape0/rate0 at every
// horizon; the variance recursion tracks the filter-shape variance
//   V[a_t] = (b_t/b_{t-1})^2 V[a_{t-1}] + (1/g) (b_t/b_{t-1}) mean,
// seeded with V[a_0] = 0, and
//   V[y_t] = V[a_{t-1}]/b_{t-1}^2 + (b_t/(g*b_{t-1})) mean.
struct MomentTrack {
  std::vector<std::int64_t> t;     // 1..horizon
  std::vector<double> mean;        // E[y_t]
  std::vector<double> shape_var;   // V[a_{t-1}]
  std::vector<double> count_var;   // V[y_t]
  std::vector<double> rate;        // b_t
};

MomentTrack variance_track(const ModelSpec& spec, std::int64_t horizon);
double predictive_mean(const ModelSpec& spec, std::int64_t t);

// Generic monotonicity report over a sequence of values: nondecreasing
// within an absolute tolerance, with the first violation pinpointed and
// strictness (every step actually increasing) noted.
struct MonotoneReport {
  bool nondecreasing = true;
  bool strictly_increasing = true;
  std::int64_t first_violation = -1;    // index i with value[i+1] < value[i]-tol
  double worst_drop = 0.0;              // most negative step seen
};

MonotoneReport check_monotone(const std::vector<double>& values, double tol);

// Zero-probability monotonicity in the prior rate at fixed t (values should
// be nondecreasing in rate0) and in t at fixed spec.
MonotoneReport check_monotone_in_rate(double discount, std::int64_t t,
                                      const std::vector<double>& rate_grid);
MonotoneReport check_monotone_in_t(const ModelSpec& spec,
                                   std::int64_t horizon);

// Monte Carlo cross-check of the decomposition
//   P[y_{t+t0} = 0] = E[ p_t(b_{t0}) ^ a_{t0} ],
// with the expectation over the filter state after t0 observed steps.
// exact is the left side from the fold; mc_mean/mc_se summarize n
// replicates of the right side. t0 = 0 degenerates to equality.
struct TowerCrossCheck {
  double exact = 0.0;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  std::int64_t n_replicates = 0;
};

TowerCrossCheck tower_crosscheck(const ModelSpec& spec, std::int64_t t,
                                 std::int64_t t0, std::int64_t n_replicates,
                                 std::uint64_t seed);

// Verifies that the one-step zero-probability map at the fixed-point rate
// has no fixed point above its known floor: scans p in
// [discount^(discount/(1-discount)) + margin, 1 - 1e-10] and checks the map
// strictly increases past p everywhere, which forces iterates upward to 1.
struct GapScanResult {
  bool ok = false;
  double min_gap = 0.0;    // min over the grid of log(map(p)) - log(p)
  double argmin_p = 0.0;
  std::int64_t n_points = 0;
  double floor = 0.0;      // discount^(discount/(1-discount))
};

GapScanResult fixed_point_gap_scan(double discount, std::int64_t n_points);

}  // namespace pgss
