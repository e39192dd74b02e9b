#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgss/model.hpp"

namespace pgss {

// Two exact ways to draw count paths from the model:
//  - path: simulate the latent intensity explicitly (gamma start, beta
//    innovations, Poisson counts);
//  - chain: draw each count from its one-step predictive and run the filter
//    forward, never touching the intensity.
// Both produce count sequences with identical law.
enum class SamplerKind { path, chain };

// One latent-path draw of length `horizon`. Step t (1-based) lives at index
// t-1 of innovations/counts; intensities and shape_trace also carry the
// time-0 entry at index 0, so intensities[t] pairs with counts[t-1].
struct PathSample {
  std::vector<double> intensities;  // theta_0 .. theta_T
  std::vector<double> innovations;  // beta multipliers eta_1 .. eta_T
  std::vector<std::int64_t> counts;  // y_1 .. y_T
  std::vector<double> shape_trace;   // filter shapes a_0 .. a_T
};

PathSample sample_path(const ModelSpec& spec, std::int64_t horizon,
                       RngStream& rng);

// Counts y_1..y_T drawn through the predictive/update chain.
std::vector<std::int64_t> sample_marginal_chain(const ModelSpec& spec,
                                                std::int64_t horizon,
                                                RngStream& rng);

// n_replicates independent count paths, replicate i on RngStream(base_seed,
// i). Row-major: replicate r, step t (1-based) at counts[r*horizon + t-1].
struct PredictiveEnsemble {
  std::int64_t horizon = 0;
  std::int64_t n_replicates = 0;
  std::uint64_t base_seed = 0;
  SamplerKind sampler = SamplerKind::path;
  std::vector<std::int64_t> counts;

  std::span<const std::int64_t> replicate(std::int64_t r) const;
  // Column of counts at step t (1-based) across replicates.
  std::vector<std::int64_t> at_time(std::int64_t t) const;
};

// n_threads = 0 picks the hardware concurrency. The result is identical for
// every thread count because streams are keyed by replicate index and each
// thread writes disjoint rows.
PredictiveEnsemble build_ensemble(const ModelSpec& spec, std::int64_t horizon,
                                  std::int64_t n_replicates,
                                  std::uint64_t base_seed, SamplerKind sampler,
                                  unsigned n_threads = 0);

// Per-step summaries across replicates. Quantiles use the lower empirical
// convention: level q maps to sorted[ceil(q*N)] (1-based), the smallest
// order statistic whose empirical cdf reaches q. variance is the unbiased
// (N-1) sample variance.
struct EnsembleSummary {
  std::int64_t horizon = 0;
  std::int64_t n_replicates = 0;
  std::vector<double> quantile_levels;
  std::vector<double> mean;                        // per step
  std::vector<double> variance;                    // per step
  std::vector<double> zero_rate;                   // per step
  std::vector<std::int64_t> max;                   // per step
  std::vector<std::vector<std::int64_t>> quantiles;  // [step][level]
};

EnsembleSummary summarize(const PredictiveEnsemble& ensemble,
                          const std::vector<double>& quantile_levels);

// Frequencies of counts 0..max at step t (1-based): histogram[k] is the
// number of replicates with count k.
std::vector<std::int64_t> histogram_at(const PredictiveEnsemble& ensemble,
                                       std::int64_t t);

}  // namespace pgss
