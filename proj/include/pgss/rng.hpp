#pragma once

#include <array>
#include <cstdint>

namespace pgss {

// Counter-keyed pseudo-random stream: replicate i of a run owns
// RngStream(seed, i). Distinct stream ids never share state, so an ensemble
// can be generated in any order, on any number of threads, and reproduce the
// same draws bit for bit.
//
// The generator is xoshiro256**; each stream's state is expanded from
// (seed, stream_id) with SplitMix64.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double next_double();

  // Standard normal via the Marsaglia polar method.
  double next_normal();

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Gamma(shape, rate) variate. Marsaglia-Tsang squeeze for shape >= 1; for
// shape < 1 a boosted draw is scaled by U^(1/shape) in log space, so the
// result stays positive (floored at the smallest positive double) even when
// the mathematical value underflows.
double draw_gamma(double shape, double rate, RngStream& rng);

// log of a Gamma(shape, rate) variate. Finite for shapes far below the point
// where draw_gamma's linear-space result would be subnormal.
double draw_log_gamma(double shape, double rate, RngStream& rng);

// Beta(alpha, beta) variate from two log-gamma draws; clamped into the open
// interval (0,1).
double draw_beta(double alpha, double beta, RngStream& rng);

// Poisson variate with the given mean. Product-of-uniforms inversion below
// mean 10, transformed rejection (PTRS) above; both are exact samplers.
// Means above kMaxPoissonMean raise numeric_error because the acceptance
// test in PTRS loses exactness to cancellation there.
inline constexpr double kMaxPoissonMean = 1e10;
std::int64_t draw_poisson(double mean, RngStream& rng);

}  // namespace pgss
