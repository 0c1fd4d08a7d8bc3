// levy: batch analysis of heavy-tailed return series.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levy/cli.hpp"

int main(int argc, char** argv) {
  using levy::cli::RunConfig;
  RunConfig cfg;
  for (int i = 0; i < argc; ++i) cfg.argv.emplace_back(argv[i]);

  CLI::App app{"Stable-law fitting, truncated Levy flights, crossover and ACF analysis"};
  app.require_subcommand(1);

  std::string on_bad_row = "fail";
  std::string format = "returns";
  std::string replay;

  auto common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("--input,-i", cfg.input_path, "input CSV");
    if (needs_input) in->required();
    sub->add_option("--output,-o", cfg.output_path, "output directory")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    sub->add_option("--on-bad-row", on_bad_row, "fail|skip")
        ->check(CLI::IsMember({"fail", "skip"}))
        ->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  };
  auto fitting = [&](CLI::App* sub) {
    sub->add_option("--significance", cfg.significance)->capture_default_str();
    sub->add_option("--mc-pvalue", cfg.mc_pvalue, "parametric-bootstrap replicates for p-values");
  };
  auto sweep = [&](CLI::App* sub) {
    sub->add_option("--levels", cfg.levels, "aggregation levels a,b,c")->delimiter(',');
    sub->add_option("--trading-day-seconds", cfg.trading_day_seconds)->capture_default_str();
    sub->add_option("--alpha-threshold", cfg.thresholds.alpha_threshold)->capture_default_str();
    sub->add_option("--kurtosis-fraction", cfg.thresholds.kurtosis_fraction)->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "clean ticks and write level-1 returns");
  common(ingest, true);
  auto* fit = app.add_subcommand("fit", "fit a stable law and run the K-S test");
  common(fit, true);
  fitting(fit);
  auto* trajectory = app.add_subcommand("trajectory", "fits across aggregation levels");
  common(trajectory, true);
  fitting(trajectory);
  sweep(trajectory);
  auto* crossover = app.add_subcommand("crossover", "trajectory plus crossover detection");
  common(crossover, true);
  fitting(crossover);
  sweep(crossover);
  auto* acf = app.add_subcommand("acf", "autocorrelation of returns and |returns|");
  common(acf, true);
  acf->add_option("--max-lag", cfg.max_lag)->capture_default_str();
  auto* simulate = app.add_subcommand("simulate", "stable or hard-truncated stable series");
  common(simulate, false);
  simulate->add_option("--alpha", cfg.sim_params.alpha)->capture_default_str();
  simulate->add_option("--beta", cfg.sim_params.beta)->capture_default_str();
  simulate->add_option("--gamma", cfg.sim_params.gamma)->capture_default_str();
  simulate->add_option("--delta", cfg.sim_params.delta)->capture_default_str();
  simulate->add_option("--n-std", cfg.n_std, "truncate at n_std sample standard deviations");
  simulate->add_option("--length", cfg.length)->capture_default_str();
  simulate->add_option("--format", format, "returns|ticks")
      ->check(CLI::IsMember({"returns", "ticks"}))
      ->capture_default_str();
  simulate->add_option("--mean-dt", cfg.mean_dt, "seconds between ticks (ticks format)")
      ->capture_default_str();
  auto* report = app.add_subcommand("report", "full pipeline: table, crossover, ACF");
  common(report, true);
  fitting(report);
  sweep(report);
  report->add_option("--max-lag", cfg.max_lag)->capture_default_str();
  auto* rerun = app.add_subcommand("replay", "re-execute the run recorded in a run.json");
  rerun->add_option("manifest", replay, "run.json")->required();
  rerun->add_option("--output,-o", cfg.output_path, "output directory override");

  CLI11_PARSE(app, argc, argv);

  if (rerun->parsed()) {
    try {
      RunConfig again = levy::cli::config_from_manifest(replay);
      if (rerun->count("--output") > 0) again.output_path = cfg.output_path;
      again.argv = cfg.argv;
      return levy::cli::run(again);
    } catch (const std::exception& e) {
      std::cerr << R"({"status":"error","stage":"replay","message":)"
                << nlohmann::json(e.what()).dump() << "}" << std::endl;
      return 1;
    }
  }

  cfg.command = levy::cli::parse_command(app.get_subcommands().front()->get_name());
  cfg.on_bad_row = levy::csv::parse_policy(on_bad_row);
  cfg.format = format == "ticks" ? levy::cli::SimulateFormat::ticks
                                 : levy::cli::SimulateFormat::returns;
  cfg.thresholds.trading_day_seconds = cfg.trading_day_seconds;
  return levy::cli::run(cfg);
}
