#include "pgss/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pgss/errors.hpp"

namespace pgss {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void check_positive_finite(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw input_error(std::string(what) + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  // Mix the seed once, then fold in the stream id with an odd multiplier so
  // ids are injective; expand to 256 bits with further SplitMix64 steps.
  std::uint64_t x = seed;
  std::uint64_t h = splitmix64(x);
  x = h ^ (stream_id * 0xD2B74407B1CE6E93ull + 0x9E3779B97F4A7C15ull);
  for (auto& word : state_) word = splitmix64(x);
  // The all-zero state is the one fixed point of xoshiro; unreachable in
  // practice but cheap to rule out.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::next_double() {
  // 53 random bits centered in the cell: values lie in (0,1) exclusive.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_double() - 1.0;
    v = 2.0 * next_double() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * m;
  has_spare_ = true;
  return u * m;
}

namespace {

// Marsaglia-Tsang for shape >= 1, unit rate.
double gamma_mt(double shape, RngStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double draw_gamma(double shape, double rate, RngStream& rng) {
  check_positive_finite(shape, "gamma shape");
  check_positive_finite(rate, "gamma rate");
  double x;
  if (shape < 1.0) {
    // Boost: G(shape) =d= G(shape+1) * U^(1/shape). The power is applied in
    // log space; tiny shapes would otherwise flush the draw to zero.
    const double g = gamma_mt(shape + 1.0, rng);
    const double t = std::log(rng.next_double()) / shape;
    x = (t > -700.0) ? g * std::exp(t) : std::exp(std::log(g) + t);
  } else {
    x = gamma_mt(shape, rng);
  }
  x /= rate;
  // Keep the support strictly positive: downstream code treats the draw as
  // a Poisson mean.
  const double floor = std::numeric_limits<double>::denorm_min();
  return x < floor ? floor : x;
}

double draw_log_gamma(double shape, double rate, RngStream& rng) {
  check_positive_finite(shape, "gamma shape");
  check_positive_finite(rate, "gamma rate");
  double lx;
  if (shape < 1.0) {
    lx = std::log(gamma_mt(shape + 1.0, rng)) +
         std::log(rng.next_double()) / shape;
  } else {
    lx = std::log(gamma_mt(shape, rng));
  }
  return lx - std::log(rate);
}

double draw_beta(double alpha, double beta, RngStream& rng) {
  check_positive_finite(alpha, "beta alpha");
  check_positive_finite(beta, "beta beta");
  // X/(X+Y) with X,Y gamma, evaluated as a stable sigmoid of the log ratio.
  const double d = draw_log_gamma(beta, 1.0, rng) - draw_log_gamma(alpha, 1.0, rng);
  double b;
  if (d >= 0.0) {
    const double e = std::exp(-d);
    b = e / (1.0 + e);
  } else {
    b = 1.0 / (1.0 + std::exp(d));
  }
  if (b <= 0.0) return std::numeric_limits<double>::denorm_min();
  if (b >= 1.0) return 0x1.fffffffffffffp-1;
  return b;
}

namespace {

// Transformed rejection with squeeze (PTRS), exact for mean >= 10.
std::int64_t poisson_ptrs(double mean, RngStream& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.next_double() - 0.5;
    const double v = rng.next_double();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * invalpha / (a / (us * us) + b)) <=
        kf * loglam - mean - std::lgamma(kf + 1.0)) {
      return static_cast<std::int64_t>(kf);
    }
  }
}

}  // namespace

std::int64_t draw_poisson(double mean, RngStream& rng) {
  check_positive_finite(mean, "poisson mean");
  if (mean > kMaxPoissonMean) {
    throw numeric_error("poisson mean " + std::to_string(mean) +
                        " exceeds the exact-sampling cap " +
                        std::to_string(kMaxPoissonMean));
  }
  if (mean >= 10.0) return poisson_ptrs(mean, rng);
  // Product-of-uniforms inversion; exp(-mean) >= exp(-10), no underflow.
  const double limit = std::exp(-mean);
  std::int64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.next_double();
  } while (p > limit);
  return k - 1;
}

}  // namespace pgss
