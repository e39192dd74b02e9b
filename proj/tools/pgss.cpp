#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pgss/errors.hpp"
#include "pgss/io.hpp"
#include "pgss/version.hpp"

namespace {

void add_model_options(CLI::App* cmd, pgss::io::RunConfig& config) {
  cmd->add_option("--a0", config.shape0, "Prior shape")
      ->capture_default_str();
  cmd->add_option("--b0", config.rate0, "Prior rate")->capture_default_str();
  cmd->add_option("--gamma", config.discount, "Discount factor in (0,1)")
      ->capture_default_str();
}

int run_figure1(const pgss::io::RunConfig& config, const std::string& out) {
  const pgss::io::Figure1Result result = pgss::io::run_figure1(config, out);
  std::cout << "wrote " << result.summary_path.string() << '\n';
  for (const auto& path : result.histogram_paths) {
    std::cout << "wrote " << path.string() << '\n';
  }
  std::cout << "wrote " << result.manifest_path.string() << '\n';
  const pgss::io::SummaryRow& last = result.rows.back();
  std::cout << "final step: mean " << last.mean << ", zero rate "
            << last.zero_rate << " (exact " << last.exact_zero_prob << ")\n"
            << "wall time " << result.wall_time_s << " s\n";
  return 0;
}

int run_filter(const std::string& input, const pgss::io::RunConfig& config,
               std::int64_t forecast, const std::string& out) {
  const pgss::io::ObservedSeries series = pgss::io::read_series_csv(input);
  const pgss::io::FilterResult result =
      pgss::io::run_filter(series, config, forecast, out);
  std::cout << "wrote " << result.filter_path.string() << '\n';
  if (forecast > 0) {
    std::cout << "wrote " << result.forecast_path.string() << '\n';
  }
  std::cout << "wrote " << result.manifest_path.string() << '\n'
            << "posterior after " << result.posterior.time
            << " steps: shape " << result.posterior.shape << ", rate "
            << result.posterior.rate << '\n';
  return 0;
}

int run_diagnostics(const pgss::io::DiagnosticsConfig& config,
                    const std::string& out) {
  const pgss::io::DiagnosticsResult result =
      pgss::io::run_diagnostics(config, out);
  for (const auto& check : result.checks) {
    std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name
              << " (discount " << check.discount << "): " << check.detail
              << '\n';
  }
  std::cout << "report: " << result.report_path.string() << '\n';
  return result.all_pass ? 0 : 4;
}

template <typename WriteFn>
int write_csv_to(const std::string& out, WriteFn&& write) {
  if (out == "-") {
    write(std::cout);
    return 0;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) {
    throw pgss::input_error("cannot open for writing: " + out);
  }
  write(file);
  file.flush();
  if (!file) {
    throw pgss::input_error("write failed: " + out);
  }
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count forecasting with a discount-weighted gamma intensity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pgss::kVersion));
  // Must precede the subcommand on the command line; keys live in a section
  // named after the subcommand, e.g. [figure1]. Flags override file values.
  app.set_config("--config", "",
                 "key=value defaults, one [section] per subcommand");

  pgss::io::RunConfig fig_config;
  std::string fig_out = ".";
  CLI::App* fig = app.add_subcommand(
      "figure1", "Reference experiment: ensemble summary plus exact overlays");
  add_model_options(fig, fig_config);
  fig->add_option("--horizon", fig_config.horizon, "Steps to simulate")
      ->capture_default_str();
  fig->add_option("--replicates", fig_config.n_replicates,
                  "Independent paths")
      ->capture_default_str();
  fig->add_option("--seed", fig_config.seed, "Base seed (required)")
      ->required();
  fig->add_option("--sampler", fig_config.sampler, "path or chain")
      ->check(CLI::IsMember({"path", "chain"}))
      ->capture_default_str();
  fig->add_option("--hist", fig_config.histogram_steps,
                  "Steps that get a histogram file")
      ->delimiter(',')
      ->capture_default_str();
  fig->add_option("--threads", fig_config.n_threads,
                  "Worker threads (0 = hardware)")
      ->capture_default_str();
  fig->add_option("--out", fig_out, "Output directory")
      ->envname("PGSS_OUT_DIR")
      ->capture_default_str();

  pgss::io::RunConfig filt_config;
  filt_config.n_replicates = 10000;
  filt_config.seed = 1;
  std::string filt_input;
  std::string filt_out = ".";
  std::int64_t filt_forecast = 0;
  CLI::App* filt = app.add_subcommand(
      "filter", "Run the conjugate filter over an observed count series");
  add_model_options(filt, filt_config);
  filt->add_option("--input", filt_input, "CSV with columns [t,]y")
      ->required();
  filt->add_option("--forecast", filt_forecast,
                   "Steps to forecast past the series")
      ->capture_default_str();
  filt->add_option("--replicates", filt_config.n_replicates,
                   "Forecast ensemble size")
      ->capture_default_str();
  filt->add_option("--seed", filt_config.seed, "Forecast ensemble seed")
      ->capture_default_str();
  filt->add_option("--sampler", filt_config.sampler, "path or chain")
      ->check(CLI::IsMember({"path", "chain"}))
      ->capture_default_str();
  filt->add_option("--threads", filt_config.n_threads,
                   "Worker threads (0 = hardware)")
      ->capture_default_str();
  filt->add_option("--out", filt_out, "Output directory")
      ->envname("PGSS_OUT_DIR")
      ->capture_default_str();

  pgss::io::DiagnosticsConfig diag_config;
  std::string diag_out = ".";
  CLI::App* diag = app.add_subcommand(
      "diagnostics", "Exact-structure checks over a discount grid");
  diag->add_option("--gammas", diag_config.discount_grid, "Discount grid")
      ->delimiter(',')
      ->capture_default_str();
  diag->add_option("--a0", diag_config.shape0, "Prior shape")
      ->capture_default_str();
  diag->add_option("--b0", diag_config.rate0, "Prior rate")
      ->capture_default_str();
  diag->add_option("--horizon", diag_config.monotone_horizon,
                   "Monotonicity sweep length")
      ->capture_default_str();
  diag->add_option("--gap-points", diag_config.gap_points,
                   "Fixed-point scan grid size")
      ->capture_default_str();
  diag->add_option("--tower-replicates", diag_config.tower_replicates,
                   "Monte Carlo size of the decomposition check")
      ->capture_default_str();
  diag->add_option("--seed", diag_config.seed, "Monte Carlo seed")
      ->capture_default_str();
  diag->add_option("--out", diag_out, "Output directory")
      ->envname("PGSS_OUT_DIR")
      ->capture_default_str();

  pgss::io::RunConfig zero_config;
  std::string zero_out = "-";
  std::int64_t zero_horizon = 200;
  CLI::App* zero = app.add_subcommand(
      "zeroprob", "Exact zero-probability curve as CSV");
  add_model_options(zero, zero_config);
  zero->add_option("--horizon", zero_horizon, "Steps to tabulate")
      ->capture_default_str();
  zero->add_option("--out", zero_out, "Output file, '-' for stdout")
      ->capture_default_str();

  pgss::io::RunConfig mom_config;
  std::string mom_out = "-";
  std::int64_t mom_horizon = 200;
  CLI::App* mom = app.add_subcommand(
      "moments", "Exact predictive mean/variance track as CSV");
  add_model_options(mom, mom_config);
  mom->add_option("--horizon", mom_horizon, "Steps to tabulate")
      ->capture_default_str();
  mom->add_option("--out", mom_out, "Output file, '-' for stdout")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (fig->parsed()) return run_figure1(fig_config, fig_out);
    if (filt->parsed()) {
      return run_filter(filt_input, filt_config, filt_forecast, filt_out);
    }
    if (diag->parsed()) return run_diagnostics(diag_config, diag_out);
    if (zero->parsed()) {
      const pgss::ModelSpec spec = zero_config.model();
      return write_csv_to(zero_out, [&](std::ostream& out) {
        pgss::io::write_zero_prob_csv(out, spec, zero_horizon);
      });
    }
    if (mom->parsed()) {
      const pgss::ModelSpec spec = mom_config.model();
      const pgss::MomentTrack track =
          pgss::variance_track(spec, mom_horizon);
      return write_csv_to(mom_out, [&](std::ostream& out) {
        pgss::io::write_moments_csv(out, track);
      });
    }
  } catch (const pgss::input_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const pgss::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
