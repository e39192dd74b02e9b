#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pgss/analytics.hpp"
#include "pgss/model.hpp"
#include "pgss/simulate.hpp"

namespace pgss::io {

// Shortest text that parses back to exactly the same double (17 significant
// digits). All CSV floats go through this.
std::string format_double(double value);

// Observed count series. Input CSV has a header with columns `t` (optional)
// and `y` (required, nonnegative integers); when `t` is absent steps are
// numbered 1..n.
struct ObservedSeries {
  std::vector<std::int64_t> t;
  std::vector<std::int64_t> counts;
};

ObservedSeries read_series_csv(const std::filesystem::path& path);
ObservedSeries parse_series_csv(std::istream& in, const std::string& name);

// Everything a seeded run needs. Defaults reproduce the reference
// experiment: prior Gamma(6.5, 1.2), discount 0.75, 200 steps, 50000
// replicates, latent-path sampler.
struct RunConfig {
  double shape0 = 6.5;
  double rate0 = 1.2;
  double discount = 0.75;
  std::int64_t horizon = 200;
  std::int64_t n_replicates = 50000;
  std::uint64_t seed = 0;
  std::string sampler = "path";  // "path" or "chain"
  std::vector<double> quantile_levels = {0.1, 0.5, 0.9};
  std::vector<std::int64_t> histogram_steps = {50, 200};
  unsigned n_threads = 0;  // 0 = hardware concurrency

  ModelSpec model() const;
  SamplerKind sampler_kind() const;
  void validate() const;
};

// Run manifest: config + seed determine every output byte; wall_time_s is
// the only field allowed to differ between reruns.
struct Manifest {
  std::string config_json;  // canonical (sorted-key) JSON text
  std::uint64_t seed = 0;
  std::string version;
  double wall_time_s = 0.0;
};

Manifest read_manifest(const std::filesystem::path& path);

// One row of the ensemble summary CSV, columns exactly
// t,mean,q10,q50,q90,max,zero_rate,analytic_mean,analytic_var,exact_zero_prob.
struct SummaryRow {
  std::int64_t t = 0;
  double mean = 0.0;
  std::int64_t q10 = 0;
  std::int64_t q50 = 0;
  std::int64_t q90 = 0;
  std::int64_t max = 0;
  double zero_rate = 0.0;
  double analytic_mean = 0.0;
  double analytic_var = 0.0;
  double exact_zero_prob = 0.0;
};

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

// Full reference experiment: ensemble + summary + exact overlays, written to
// out_dir as summary.csv, hist_t<step>.csv per requested histogram step, and
// manifest.json. All computation happens before the first byte is written.
struct Figure1Result {
  std::filesystem::path summary_path;
  std::filesystem::path manifest_path;
  std::vector<std::filesystem::path> histogram_paths;
  std::vector<SummaryRow> rows;
  double wall_time_s = 0.0;
};

Figure1Result run_figure1(const RunConfig& config,
                          const std::filesystem::path& out_dir);

// Filtering pass over an observed series plus an analytic + Monte Carlo
// forecast from the final posterior. Writes filter.csv, forecast.csv (when
// forecast_horizon > 0) and manifest.json.
struct FilterRow {
  std::int64_t t = 0;
  std::int64_t y = 0;
  double prior_shape = 0.0;
  double prior_rate = 0.0;
  double post_shape = 0.0;
  double post_rate = 0.0;
  double pred_mean = 0.0;
  double pred_var = 0.0;
  double pred_zero = 0.0;
};

struct ForecastRow {
  std::int64_t step = 0;  // steps ahead of the last observation
  double mean = 0.0;
  double variance = 0.0;
  double zero_prob = 0.0;
  std::int64_t q10 = 0;
  std::int64_t q50 = 0;
  std::int64_t q90 = 0;
};

struct FilterResult {
  std::vector<FilterRow> rows;
  FilterState posterior;
  std::vector<ForecastRow> forecast;
  std::filesystem::path filter_path;
  std::filesystem::path forecast_path;
  std::filesystem::path manifest_path;
};

FilterResult run_filter(const ObservedSeries& series, const RunConfig& config,
                        std::int64_t forecast_horizon,
                        const std::filesystem::path& out_dir);

// Battery of exact-structure checks swept over a discount grid; writes
// diagnostics.json. Every check must pass on a healthy build.
struct DiagnosticsConfig {
  std::vector<double> discount_grid = {0.3, 0.5, 0.75, 0.9};
  double shape0 = 6.5;
  double rate0 = 1.2;
  std::int64_t monotone_horizon = 200;
  std::int64_t gap_points = 20000;
  std::int64_t tower_replicates = 20000;
  std::uint64_t seed = 1;
};

struct DiagnosticCheck {
  std::string name;
  double discount = 0.0;
  bool pass = false;
  std::string detail;
};

struct DiagnosticsResult {
  std::vector<DiagnosticCheck> checks;
  bool all_pass = false;
  std::filesystem::path report_path;
};

DiagnosticsResult run_diagnostics(const DiagnosticsConfig& config,
                                  const std::filesystem::path& out_dir);

// Plain CSV writers for the closed-form curves.
// zeroprob: t,unit_prob,zero_prob ; moments: t,mean,shape_var,count_var,rate.
void write_zero_prob_csv(std::ostream& out, const ModelSpec& spec,
                         std::int64_t horizon);
void write_moments_csv(std::ostream& out, const MomentTrack& track);

}  // namespace pgss::io
