#include "pgss/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "pgss/errors.hpp"

namespace pgss {

namespace {

// Filter shapes decay geometrically through long all-zero stretches; the
// floor keeps the beta/gamma log-space samplers finite. At any horizon the
// tests reach, the floor is never active.
constexpr double kMinShape = 1e-250;

void check_horizon(std::int64_t horizon, std::int64_t least) {
  if (horizon < least) {
    throw input_error("horizon must be >= " + std::to_string(least) +
                      ", got " + std::to_string(horizon));
  }
}

// Shared core of the latent-path sampler: on_init sees theta_0, on_step
// sees (t, intensity, innovation, count, shape) per step.
template <typename OnInit, typename OnStep>
void run_path(const ModelSpec& spec, std::int64_t horizon, RngStream& rng,
              OnInit&& on_init, OnStep&& on_step) {
  const double g = spec.discount();
  double theta = draw_gamma(spec.shape0(), spec.rate0(), rng);
  on_init(theta);
  double shape = spec.shape0();
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const double eta = draw_beta(g * shape, (1.0 - g) * shape, rng);
    theta = theta * eta / g;
    if (!std::isfinite(theta)) {
      throw numeric_error("latent intensity became non-finite at step " +
                          std::to_string(t));
    }
    if (theta < std::numeric_limits<double>::min()) {
      theta = std::numeric_limits<double>::min();
    }
    if (theta > kMaxPoissonMean) {
      throw numeric_error("latent intensity " + std::to_string(theta) +
                          " at step " + std::to_string(t) +
                          " exceeds the exact-sampling cap");
    }
    const std::int64_t y = draw_poisson(theta, rng);
    shape = g * shape + static_cast<double>(y);
    if (shape < kMinShape) shape = kMinShape;
    on_step(t, theta, eta, y, shape);
  }
}

void run_chain(const ModelSpec& spec, std::int64_t horizon, RngStream& rng,
               std::int64_t* out) {
  FilterState state = initial_state(spec);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const std::int64_t y = one_step_predictive(state, spec).sample(rng);
    state = update(state, y, spec);
    if (state.shape < kMinShape) state.shape = kMinShape;
    out[t - 1] = y;
  }
}

}  // namespace

PathSample sample_path(const ModelSpec& spec, std::int64_t horizon,
                       RngStream& rng) {
  check_horizon(horizon, 0);
  PathSample sample;
  sample.intensities.reserve(horizon + 1);
  sample.innovations.reserve(horizon);
  sample.counts.reserve(horizon);
  sample.shape_trace.reserve(horizon + 1);
  sample.shape_trace.push_back(spec.shape0());
  run_path(
      spec, horizon, rng,
      [&](double theta0) { sample.intensities.push_back(theta0); },
      [&](std::int64_t, double theta, double eta, std::int64_t y,
          double shape) {
        sample.intensities.push_back(theta);
        sample.innovations.push_back(eta);
        sample.counts.push_back(y);
        sample.shape_trace.push_back(shape);
      });
  return sample;
}

std::vector<std::int64_t> sample_marginal_chain(const ModelSpec& spec,
                                                std::int64_t horizon,
                                                RngStream& rng) {
  check_horizon(horizon, 0);
  std::vector<std::int64_t> counts(horizon);
  run_chain(spec, horizon, rng, counts.data());
  return counts;
}

std::span<const std::int64_t> PredictiveEnsemble::replicate(
    std::int64_t r) const {
  if (r < 0 || r >= n_replicates) {
    throw input_error("replicate index out of range: " + std::to_string(r));
  }
  return std::span<const std::int64_t>(counts.data() + r * horizon, horizon);
}

std::vector<std::int64_t> PredictiveEnsemble::at_time(std::int64_t t) const {
  if (t < 1 || t > horizon) {
    throw input_error("step index out of range: " + std::to_string(t));
  }
  std::vector<std::int64_t> column(n_replicates);
  for (std::int64_t r = 0; r < n_replicates; ++r) {
    column[r] = counts[r * horizon + t - 1];
  }
  return column;
}

PredictiveEnsemble build_ensemble(const ModelSpec& spec, std::int64_t horizon,
                                  std::int64_t n_replicates,
                                  std::uint64_t base_seed, SamplerKind sampler,
                                  unsigned n_threads) {
  check_horizon(horizon, 1);
  if (n_replicates < 1) {
    throw input_error("ensemble needs at least one replicate, got " +
                      std::to_string(n_replicates));
  }
  PredictiveEnsemble ensemble;
  ensemble.horizon = horizon;
  ensemble.n_replicates = n_replicates;
  ensemble.base_seed = base_seed;
  ensemble.sampler = sampler;
  ensemble.counts.resize(horizon * n_replicates);

  if (n_threads == 0) n_threads = std::thread::hardware_concurrency();
  if (n_threads < 1) n_threads = 1;
  if (static_cast<std::int64_t>(n_threads) > n_replicates) {
    n_threads = static_cast<unsigned>(n_replicates);
  }

  auto worker = [&](std::int64_t first, std::int64_t last,
                    std::exception_ptr& error) noexcept {
    try {
      for (std::int64_t r = first; r < last; ++r) {
        RngStream rng(base_seed, static_cast<std::uint64_t>(r));
        std::int64_t* row = ensemble.counts.data() + r * horizon;
        if (sampler == SamplerKind::chain) {
          run_chain(spec, horizon, rng, row);
        } else {
          run_path(
              spec, horizon, rng, [](double) {},
              [row](std::int64_t t, double, double, std::int64_t y, double) {
                row[t - 1] = y;
              });
        }
      }
    } catch (...) {
      error = std::current_exception();
    }
  };

  if (n_threads == 1) {
    std::exception_ptr error;
    worker(0, n_replicates, error);
    if (error) std::rethrow_exception(error);
    return ensemble;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  const std::int64_t chunk =
      (n_replicates + n_threads - 1) / static_cast<std::int64_t>(n_threads);
  for (unsigned j = 0; j < n_threads; ++j) {
    const std::int64_t first = static_cast<std::int64_t>(j) * chunk;
    const std::int64_t last = std::min<std::int64_t>(first + chunk,
                                                     n_replicates);
    if (first >= last) break;
    pool.emplace_back(worker, first, last, std::ref(errors[j]));
  }
  for (auto& th : pool) th.join();
  for (auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return ensemble;
}

namespace {

// 1-based rank of the lower empirical quantile: the smallest i with
// i >= level*n. The nudge absorbs the representation error of levels like
// 0.1, whose double value times n lands a hair above the exact integer.
std::int64_t quantile_rank(double level, std::int64_t n) {
  const double target = level * static_cast<double>(n);
  std::int64_t rank = static_cast<std::int64_t>(
      std::ceil(target - 8.0 * std::numeric_limits<double>::epsilon() * target));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return rank;
}

}  // namespace

EnsembleSummary summarize(const PredictiveEnsemble& ensemble,
                          const std::vector<double>& quantile_levels) {
  for (double level : quantile_levels) {
    if (!(level > 0.0) || !(level < 1.0)) {
      throw input_error("quantile level must lie in (0,1), got " +
                        std::to_string(level));
    }
  }
  const std::int64_t horizon = ensemble.horizon;
  const std::int64_t n = ensemble.n_replicates;
  if (horizon < 1 || n < 1 ||
      std::ssize(ensemble.counts) != horizon * n) {
    throw input_error("ensemble is empty or inconsistent");
  }

  EnsembleSummary summary;
  summary.horizon = horizon;
  summary.n_replicates = n;
  summary.quantile_levels = quantile_levels;
  summary.mean.resize(horizon);
  summary.variance.resize(horizon);
  summary.zero_rate.resize(horizon);
  summary.max.resize(horizon);
  summary.quantiles.resize(horizon);

  std::vector<std::int64_t> column(n);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    for (std::int64_t r = 0; r < n; ++r) {
      column[r] = ensemble.counts[r * horizon + t - 1];
    }
    std::int64_t total = 0;
    std::int64_t zeros = 0;
    for (std::int64_t y : column) {
      total += y;
      zeros += (y == 0);
    }
    const double mean = static_cast<double>(total) / static_cast<double>(n);
    double ss = 0.0;
    for (std::int64_t y : column) {
      const double d = static_cast<double>(y) - mean;
      ss += d * d;
    }
    std::sort(column.begin(), column.end());
    const std::int64_t idx = t - 1;
    summary.mean[idx] = mean;
    summary.variance[idx] = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    summary.zero_rate[idx] =
        static_cast<double>(zeros) / static_cast<double>(n);
    summary.max[idx] = column.back();
    summary.quantiles[idx].reserve(quantile_levels.size());
    for (double level : quantile_levels) {
      summary.quantiles[idx].push_back(column[quantile_rank(level, n) - 1]);
    }
  }
  return summary;
}

std::vector<std::int64_t> histogram_at(const PredictiveEnsemble& ensemble,
                                       std::int64_t t) {
  const std::vector<std::int64_t> column = ensemble.at_time(t);
  const std::int64_t top = *std::max_element(column.begin(), column.end());
  std::vector<std::int64_t> freq(top + 1, 0);
  for (std::int64_t y : column) ++freq[y];
  return freq;
}

}  // namespace pgss
