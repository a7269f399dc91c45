#include "pointstokes/driver.hpp"

#include "pointstokes/error.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace pointstokes {

int cli_main(int argc, const char* const* argv)
{
  CLI::App app{"Adaptive finite elements for Stokes flow driven by point forces"};
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_path;
  long long max_ndof = 0;
  bool quiet = false;
  int window = 0;

  auto* run_cmd = app.add_subcommand("run", "Run the adaptive (or uniform) loop");
  run_cmd->add_option("--config", config_path, "JSON configuration file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run_cmd->add_option("--max-ndof", max_ndof, "Stop once Ndof reaches this value");
  run_cmd->add_flag("--quiet", quiet, "Suppress per-iteration progress");

  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration file");
  validate_cmd->add_option("--config", config_path, "JSON configuration file")->required();

  auto* rates_cmd = app.add_subcommand("rates", "Fit convergence rates from records.csv");
  rates_cmd->add_option("csv", csv_path, "records.csv produced by run")->required();
  rates_cmd->add_option("--window", window, "Number of trailing records to fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      ProblemConfig config = load_config(config_path);
      if (!out_dir.empty())
        config.output_dir = out_dir;
      if (max_ndof > 0)
        config.max_ndof = max_ndof;
      const auto records = run_and_write(config, quiet);
      if (!quiet)
        std::printf("wrote %zu records to %s\n", records.size(), config.output_dir.c_str());
      return 0;
    }
    if (*validate_cmd) {
      validate_config(load_config(config_path));
      std::printf("ok\n");
      return 0;
    }
    if (*rates_cmd) {
      std::ifstream in(csv_path);
      if (!in)
        throw Error("cannot open " + csv_path);
      const auto records = read_records_csv(in);
      const int w = window > 0 ? window : default_rate_window(records);
      std::printf("window %d\n", w);
      std::printf("quantity slope\n");
      std::printf("estimator %.6f\n", fit_rate(records, RateQuantity::estimator, w));
      if (!records.empty() && std::isfinite(records.back().error_total)) {
        std::printf("error_total %.6f\n", fit_rate(records, RateQuantity::error_total, w));
        std::printf("error_grad %.6f\n", fit_rate(records, RateQuantity::error_grad, w));
        std::printf("error_pressure %.6f\n", fit_rate(records, RateQuantity::error_pressure, w));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

} // namespace pointstokes
