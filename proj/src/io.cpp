#include "pgss/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "pgss/errors.hpp"
#include "pgss/version.hpp"

namespace pgss::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(field);
  return fields;
}

std::int64_t parse_int(const std::string& field, const std::string& name,
                       std::size_t line_no) {
  std::int64_t value = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw input_error(name + " line " + std::to_string(line_no) +
                      ": not an integer: '" + field + "'");
  }
  return value;
}

double parse_double(const std::string& field, const std::string& name,
                    std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw input_error(name + " line " + std::to_string(line_no) +
                      ": not a number: '" + field + "'");
  }
  return value;
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw input_error("cannot open for writing: " + path.string());
  }
  return out;
}

void finish_write(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) {
    throw input_error("write failed: " + path.string());
  }
}

}  // namespace

ObservedSeries parse_series_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw input_error(name + ": empty file");
  }
  const std::vector<std::string> header = split_fields(line);
  bool has_t = false;
  if (header.size() == 1 && header[0] == "y") {
    has_t = false;
  } else if (header.size() == 2 && header[0] == "t" && header[1] == "y") {
    has_t = true;
  } else {
    throw input_error(name + ": header must be 'y' or 't,y', got '" + line +
                      "'");
  }

  ObservedSeries series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw input_error(name + " line " + std::to_string(line_no) +
                        ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    }
    const std::int64_t y = parse_int(fields[has_t ? 1 : 0], name, line_no);
    if (y < 0) {
      throw input_error(name + " line " + std::to_string(line_no) +
                        ": count must be nonnegative, got " +
                        std::to_string(y));
    }
    if (has_t) {
      series.t.push_back(parse_int(fields[0], name, line_no));
    }
    series.counts.push_back(y);
  }
  if (series.counts.empty()) {
    throw input_error(name + ": no data rows");
  }
  return series;
}

ObservedSeries read_series_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw input_error("cannot open: " + path.string());
  }
  return parse_series_csv(in, path.string());
}

ModelSpec RunConfig::model() const {
  return ModelSpec(shape0, rate0, discount);
}

SamplerKind RunConfig::sampler_kind() const {
  if (sampler == "path") return SamplerKind::path;
  if (sampler == "chain") return SamplerKind::chain;
  throw input_error("sampler must be 'path' or 'chain', got '" + sampler +
                    "'");
}

void RunConfig::validate() const {
  model();
  sampler_kind();
  if (horizon < 1) {
    throw input_error("horizon must be >= 1, got " + std::to_string(horizon));
  }
  if (n_replicates < 1) {
    throw input_error("n_replicates must be >= 1, got " +
                      std::to_string(n_replicates));
  }
  for (double level : quantile_levels) {
    if (!(level > 0.0) || !(level < 1.0)) {
      throw input_error("quantile level must lie in (0,1), got " +
                        std::to_string(level));
    }
  }
  for (std::int64_t step : histogram_steps) {
    if (step < 1 || step > horizon) {
      throw input_error("histogram step " + std::to_string(step) +
                        " outside 1.." + std::to_string(horizon));
    }
  }
}

namespace {

json config_to_json(const RunConfig& config) {
  return json{{"discount", config.discount},
              {"histogram_steps", config.histogram_steps},
              {"horizon", config.horizon},
              {"n_replicates", config.n_replicates},
              {"quantile_levels", config.quantile_levels},
              {"rate0", config.rate0},
              {"sampler", config.sampler},
              {"shape0", config.shape0}};
}

void write_manifest(const fs::path& path, const RunConfig& config,
                    double wall_time_s) {
  const json manifest{{"config", config_to_json(config)},
                      {"seed", config.seed},
                      {"version", std::string(kVersion)},
                      {"wall_time_s", wall_time_s}};
  std::ofstream out = open_for_write(path);
  out << manifest.dump(2) << '\n';
  finish_write(out, path);
}

}  // namespace

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw input_error("cannot open: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw input_error("bad manifest " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("config") || !j.contains("seed") ||
      !j.contains("version") || !j.contains("wall_time_s")) {
    throw input_error("manifest " + path.string() +
                      " is missing required keys");
  }
  Manifest manifest;
  manifest.config_json = j["config"].dump();
  manifest.seed = j["seed"].get<std::uint64_t>();
  manifest.version = j["version"].get<std::string>();
  manifest.wall_time_s = j["wall_time_s"].get<double>();
  return manifest;
}

namespace {

constexpr const char* kSummaryHeader =
    "t,mean,q10,q50,q90,max,zero_rate,analytic_mean,analytic_var,"
    "exact_zero_prob";

}  // namespace

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw input_error("cannot open: " + path.string());
  }
  const std::string name = path.string();
  std::string line;
  if (!std::getline(in, line)) {
    throw input_error(name + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSummaryHeader) {
    throw input_error(name + ": unexpected header '" + line + "'");
  }
  std::vector<SummaryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 10) {
      throw input_error(name + " line " + std::to_string(line_no) +
                        ": expected 10 fields, got " +
                        std::to_string(fields.size()));
    }
    SummaryRow row;
    row.t = parse_int(fields[0], name, line_no);
    row.mean = parse_double(fields[1], name, line_no);
    row.q10 = parse_int(fields[2], name, line_no);
    row.q50 = parse_int(fields[3], name, line_no);
    row.q90 = parse_int(fields[4], name, line_no);
    row.max = parse_int(fields[5], name, line_no);
    row.zero_rate = parse_double(fields[6], name, line_no);
    row.analytic_mean = parse_double(fields[7], name, line_no);
    row.analytic_var = parse_double(fields[8], name, line_no);
    row.exact_zero_prob = parse_double(fields[9], name, line_no);
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw input_error(name + ": no data rows");
  }
  return rows;
}

Figure1Result run_figure1(const RunConfig& config, const fs::path& out_dir) {
  config.validate();
  if (config.quantile_levels != std::vector<double>{0.1, 0.5, 0.9}) {
    throw input_error(
        "the summary format pins quantile levels to 0.1, 0.5, 0.9");
  }
  const auto start = std::chrono::steady_clock::now();

  const ModelSpec spec = config.model();
  const PredictiveEnsemble ensemble =
      build_ensemble(spec, config.horizon, config.n_replicates, config.seed,
                     config.sampler_kind(), config.n_threads);
  const EnsembleSummary summary = summarize(ensemble, config.quantile_levels);
  const MomentTrack track = variance_track(spec, config.horizon);
  const ZeroProbTable table(spec, config.horizon);

  Figure1Result result;
  result.rows.reserve(config.horizon);
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    const std::int64_t i = t - 1;
    SummaryRow row;
    row.t = t;
    row.mean = summary.mean[i];
    row.q10 = summary.quantiles[i][0];
    row.q50 = summary.quantiles[i][1];
    row.q90 = summary.quantiles[i][2];
    row.max = summary.max[i];
    row.zero_rate = summary.zero_rate[i];
    row.analytic_mean = track.mean[i];
    row.analytic_var = track.count_var[i];
    row.exact_zero_prob = table.zero_prob(t);
    result.rows.push_back(row);
  }

  std::vector<std::vector<std::int64_t>> histograms;
  histograms.reserve(config.histogram_steps.size());
  for (std::int64_t step : config.histogram_steps) {
    histograms.push_back(histogram_at(ensemble, step));
  }

  // Everything is computed; only now touch the filesystem.
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw input_error("cannot create directory " + out_dir.string() + ": " +
                      ec.message());
  }

  result.summary_path = out_dir / "summary.csv";
  {
    std::ofstream out = open_for_write(result.summary_path);
    out << kSummaryHeader << '\n';
    for (const SummaryRow& row : result.rows) {
      out << row.t << ',' << format_double(row.mean) << ',' << row.q10 << ','
          << row.q50 << ',' << row.q90 << ',' << row.max << ','
          << format_double(row.zero_rate) << ','
          << format_double(row.analytic_mean) << ','
          << format_double(row.analytic_var) << ','
          << format_double(row.exact_zero_prob) << '\n';
    }
    finish_write(out, result.summary_path);
  }

  for (std::size_t i = 0; i < config.histogram_steps.size(); ++i) {
    const fs::path path =
        out_dir /
        ("hist_t" + std::to_string(config.histogram_steps[i]) + ".csv");
    std::ofstream out = open_for_write(path);
    out << "count,frequency\n";
    for (std::size_t k = 0; k < histograms[i].size(); ++k) {
      out << k << ',' << histograms[i][k] << '\n';
    }
    finish_write(out, path);
    result.histogram_paths.push_back(path);
  }

  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  result.manifest_path = out_dir / "manifest.json";
  write_manifest(result.manifest_path, config, result.wall_time_s);
  return result;
}

FilterResult run_filter(const ObservedSeries& series, const RunConfig& config,
                        std::int64_t forecast_horizon,
                        const fs::path& out_dir) {
  config.validate();
  if (forecast_horizon < 0) {
    throw input_error("forecast horizon must be >= 0, got " +
                      std::to_string(forecast_horizon));
  }
  if (!series.t.empty() && series.t.size() != series.counts.size()) {
    throw input_error("series labels and counts disagree in length");
  }
  const auto start = std::chrono::steady_clock::now();

  const ModelSpec spec = config.model();
  FilterResult result;
  result.rows.reserve(series.counts.size());
  FilterState state = initial_state(spec);
  for (std::size_t i = 0; i < series.counts.size(); ++i) {
    const std::int64_t y = series.counts[i];
    const FilterState prior = propagate_prior(state, spec);
    const NegBinPredictive pred = one_step_predictive(state, spec);
    const FilterState post = update(state, y, spec);
    FilterRow row;
    row.t = series.t.empty() ? static_cast<std::int64_t>(i + 1) : series.t[i];
    row.y = y;
    row.prior_shape = prior.shape;
    row.prior_rate = prior.rate;
    row.post_shape = post.shape;
    row.post_rate = post.rate;
    row.pred_mean = pred.mean();
    row.pred_var = pred.variance();
    row.pred_zero = pred.prob_zero();
    result.rows.push_back(row);
    state = post;
  }
  result.posterior = state;

  if (forecast_horizon > 0) {
    // The posterior is the prior of a fresh run; every tool applies as is.
    const ModelSpec ahead(state.shape, state.rate, spec.discount());
    const MomentTrack track = variance_track(ahead, forecast_horizon);
    const ZeroProbTable table(ahead, forecast_horizon);
    const PredictiveEnsemble ensemble =
        build_ensemble(ahead, forecast_horizon, config.n_replicates,
                       config.seed, config.sampler_kind(), config.n_threads);
    const EnsembleSummary summary =
        summarize(ensemble, std::vector<double>{0.1, 0.5, 0.9});
    result.forecast.reserve(forecast_horizon);
    for (std::int64_t k = 1; k <= forecast_horizon; ++k) {
      ForecastRow row;
      row.step = k;
      row.mean = track.mean[k - 1];
      row.variance = track.count_var[k - 1];
      row.zero_prob = table.zero_prob(k);
      row.q10 = summary.quantiles[k - 1][0];
      row.q50 = summary.quantiles[k - 1][1];
      row.q90 = summary.quantiles[k - 1][2];
      result.forecast.push_back(row);
    }
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw input_error("cannot create directory " + out_dir.string() + ": " +
                      ec.message());
  }

  result.filter_path = out_dir / "filter.csv";
  {
    std::ofstream out = open_for_write(result.filter_path);
    out << "t,y,prior_shape,prior_rate,post_shape,post_rate,pred_mean,"
           "pred_var,pred_zero\n";
    for (const FilterRow& row : result.rows) {
      out << row.t << ',' << row.y << ',' << format_double(row.prior_shape)
          << ',' << format_double(row.prior_rate) << ','
          << format_double(row.post_shape) << ','
          << format_double(row.post_rate) << ','
          << format_double(row.pred_mean) << ','
          << format_double(row.pred_var) << ','
          << format_double(row.pred_zero) << '\n';
    }
    finish_write(out, result.filter_path);
  }

  if (forecast_horizon > 0) {
    result.forecast_path = out_dir / "forecast.csv";
    std::ofstream out = open_for_write(result.forecast_path);
    out << "step,mean,variance,zero_prob,q10,q50,q90\n";
    for (const ForecastRow& row : result.forecast) {
      out << row.step << ',' << format_double(row.mean) << ','
          << format_double(row.variance) << ','
          << format_double(row.zero_prob) << ',' << row.q10 << ',' << row.q50
          << ',' << row.q90 << '\n';
    }
    finish_write(out, result.forecast_path);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  result.manifest_path = out_dir / "manifest.json";
  write_manifest(result.manifest_path, config, wall);
  return result;
}

namespace {

std::string brief(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace

DiagnosticsResult run_diagnostics(const DiagnosticsConfig& config,
                                  const fs::path& out_dir) {
  if (config.discount_grid.empty()) {
    throw input_error("diagnostics need at least one discount value");
  }
  DiagnosticsResult result;
  auto add = [&](const std::string& name, double discount, bool pass,
                 std::string detail) {
    result.checks.push_back(
        DiagnosticCheck{name, discount, pass, std::move(detail)});
  };

  for (double g : config.discount_grid) {
    const ModelSpec spec(config.shape0, config.rate0, g);
    const double fixed_rate = 1.0 / (1.0 - g);
    const double floor = std::exp(g / (1.0 - g) * std::log(g));

    {
      // One step from the fixed-point rate lands exactly on g^g.
      const double got = pgf_unit(0.0, 1, fixed_rate, g);
      const double want = std::pow(g, g);
      add("fixed_point_value", g, std::abs(got - want) <= 1e-12,
          "p1(b*)=" + brief(got) + " expected " + brief(want));
    }
    {
      const ZeroProbTable unit_table(ModelSpec(1.0, fixed_rate, g),
                                     config.monotone_horizon);
      double min_p = 1.0;
      for (std::int64_t t = 1; t <= config.monotone_horizon; ++t) {
        min_p = std::min(min_p, unit_table.unit_prob(t));
      }
      add("lower_bound", g, min_p >= floor - 1e-12,
          "min p_t(b*)=" + brief(min_p) + " floor " + brief(floor));
    }
    {
      const GapScanResult scan = fixed_point_gap_scan(g, config.gap_points);
      add("gap_scan", g, scan.ok,
          "min gap " + brief(scan.min_gap) + " at p=" + brief(scan.argmin_p));
    }
    {
      const MonotoneReport report =
          check_monotone_in_rate(g, 10, {0.5, 1.0, 2.0, 4.0, 8.0});
      add("monotone_in_rate", g, report.nondecreasing,
          report.nondecreasing
              ? "ordered over the rate grid"
              : "violation at grid index " +
                    std::to_string(report.first_violation));
    }
    {
      const MonotoneReport report =
          check_monotone_in_t(spec, config.monotone_horizon);
      add("monotone_in_t", g, report.nondecreasing,
          report.nondecreasing
              ? "nondecreasing through t=" +
                    std::to_string(config.monotone_horizon)
              : "violation at t=" +
                    std::to_string(report.first_violation + 1));
    }
    {
      const ZeroProbTable table(spec, config.monotone_horizon);
      const bool pass = table.nondecreasing_in_t() && table.monotone_in_rate();
      add("table_flags", g, pass,
          pass ? "strip sweep ordered" : "strip sweep found an inversion");
    }
    {
      const TowerCrossCheck tower =
          tower_crosscheck(spec, 5, 5, config.tower_replicates, config.seed);
      const double diff = std::abs(tower.exact - tower.mc_mean);
      add("tower", g, diff <= 3.0 * tower.mc_se,
          "exact " + brief(tower.exact) + " mc " + brief(tower.mc_mean) +
              " se " + brief(tower.mc_se));
    }
    {
      const auto crossing = find_crossing_horizon(spec, 0.99, 5000000);
      add("zero_prob_crossing", g, crossing.has_value(),
          crossing ? "first t with P[zero] > 0.99: " + std::to_string(*crossing)
                   : "no crossing by t=5000000");
    }
  }

  result.all_pass = true;
  for (const DiagnosticCheck& check : result.checks) {
    result.all_pass = result.all_pass && check.pass;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw input_error("cannot create directory " + out_dir.string() + ": " +
                      ec.message());
  }
  result.report_path = out_dir / "diagnostics.json";
  json checks = json::array();
  for (const DiagnosticCheck& check : result.checks) {
    checks.push_back(json{{"name", check.name},
                          {"discount", check.discount},
                          {"pass", check.pass},
                          {"detail", check.detail}});
  }
  const json report{{"all_pass", result.all_pass},
                    {"checks", checks},
                    {"seed", config.seed},
                    {"version", std::string(kVersion)}};
  std::ofstream out = open_for_write(result.report_path);
  out << report.dump(2) << '\n';
  finish_write(out, result.report_path);
  return result;
}

void write_zero_prob_csv(std::ostream& out, const ModelSpec& spec,
                         std::int64_t horizon) {
  const ZeroProbTable table(spec, horizon);
  out << "t,unit_prob,zero_prob\n";
  for (std::int64_t t = 1; t <= horizon; ++t) {
    out << t << ',' << format_double(table.unit_prob(t)) << ','
        << format_double(table.zero_prob(t)) << '\n';
  }
}

void write_moments_csv(std::ostream& out, const MomentTrack& track) {
  out << "t,mean,shape_var,count_var,rate\n";
  for (std::size_t i = 0; i < track.t.size(); ++i) {
    out << track.t[i] << ',' << format_double(track.mean[i]) << ','
        << format_double(track.shape_var[i]) << ','
        << format_double(track.count_var[i]) << ','
        << format_double(track.rate[i]) << '\n';
  }
}

}  // namespace pgss::io
