#pragma once

// Batch commands behind the `levy` executable. Argument parsing lives in the
// tool; everything here works on a resolved RunConfig so runs can be replayed
// from their manifest.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "levy/autocorr.hpp"
#include "levy/crossover.hpp"
#include "levy/csv.hpp"
#include "levy/error.hpp"
#include "levy/estimation.hpp"
#include "levy/returns.hpp"
#include "levy/rng.hpp"
#include "levy/stable.hpp"
#include "levy/tlf.hpp"
#include "levy/version.hpp"

namespace levy::cli {

enum class Command { ingest, fit, trajectory, crossover, acf, simulate, report };

[[nodiscard]] inline std::string_view command_name(Command c) {
  switch (c) {
    case Command::ingest: return "ingest";
    case Command::fit: return "fit";
    case Command::trajectory: return "trajectory";
    case Command::crossover: return "crossover";
    case Command::acf: return "acf";
    case Command::simulate: return "simulate";
    case Command::report: return "report";
  }
  return "?";
}

[[nodiscard]] inline Command parse_command(std::string_view s) {
  for (Command c : {Command::ingest, Command::fit, Command::trajectory, Command::crossover,
                    Command::acf, Command::simulate, Command::report}) {
    if (command_name(c) == s) return c;
  }
  throw InvalidParameter("unknown command '" + std::string(s) + "'");
}

enum class SimulateFormat { returns, ticks };

struct RunConfig {
  Command command = Command::report;
  std::string input_path;
  std::string output_path = ".";
  Seed seed = 0;
  std::vector<std::size_t> levels;  // empty: default levels
  double trading_day_seconds = kTradingDaySeconds;
  CrossoverConfig thresholds;
  double significance = 0.05;
  std::size_t max_lag = 200;
  int mc_pvalue = 0;  // bootstrap replicates; 0 = asymptotic p-values
  csv::BadRowPolicy on_bad_row = csv::BadRowPolicy::fail;
  unsigned threads = 0;

  // simulate
  StableParams sim_params{1.4, 0.0, 1.0, 0.0};
  double n_std = std::numeric_limits<double>::infinity();
  std::size_t length = 1'000'000;
  SimulateFormat format = SimulateFormat::returns;
  double mean_dt = 19.3;
  double start_value = 1000.0;

  std::vector<std::string> argv;  // echoed into the manifest

  void validate() const {
    if (!(significance > 0.0 && significance < 1.0)) {
      throw InvalidParameter("significance must lie in (0, 1)");
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
      if (levels[i] <= levels[i - 1]) throw InvalidParameter("levels must be strictly increasing");
    }
    for (std::size_t l : levels) {
      if (l < 1) throw InvalidParameter("levels must be >= 1");
    }
    if (!(trading_day_seconds > 0.0)) throw InvalidParameter("trading day seconds must be positive");
    if (command != Command::simulate && input_path.empty()) {
      throw InvalidParameter(std::string(command_name(command)) + " needs --input");
    }
    if (command == Command::simulate) {
      sim_params.validate();
      if (length < 1) throw InvalidParameter("length must be >= 1");
      if (!(n_std > 0.0)) throw InvalidParameter("n-std must be positive");
      if (!(mean_dt > 0.0)) throw InvalidParameter("mean-dt must be positive");
    }
    if (max_lag < 1) throw InvalidParameter("max-lag must be >= 1");
    if (mc_pvalue < 0) throw InvalidParameter("mc-pvalue must be >= 0");
  }

  [[nodiscard]] std::vector<std::size_t> effective_levels() const {
    return levels.empty() ? default_levels() : levels;
  }
};

// ---------------------------------------------------------------------------
// JSON round trip of the configuration

namespace detail {

inline nlohmann::json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double read_number(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidParameter("manifest: bad number '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = command_name(c.command);
  j["input"] = c.input_path;
  j["output"] = c.output_path;
  j["seed"] = c.seed;
  j["levels"] = c.levels;
  j["trading_day_seconds"] = c.trading_day_seconds;
  j["alpha_threshold"] = c.thresholds.alpha_threshold;
  j["kurtosis_fraction"] = c.thresholds.kurtosis_fraction;
  j["significance"] = c.significance;
  j["max_lag"] = c.max_lag;
  j["mc_pvalue"] = c.mc_pvalue;
  j["on_bad_row"] = c.on_bad_row == csv::BadRowPolicy::fail ? "fail" : "skip";
  j["threads"] = c.threads;
  j["alpha"] = c.sim_params.alpha;
  j["beta"] = c.sim_params.beta;
  j["gamma"] = c.sim_params.gamma;
  j["delta"] = c.sim_params.delta;
  j["n_std"] = detail::number(c.n_std);
  j["length"] = c.length;
  j["format"] = c.format == SimulateFormat::ticks ? "ticks" : "returns";
  j["mean_dt"] = c.mean_dt;
  j["start_value"] = c.start_value;
  return j;
}

[[nodiscard]] inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.command = parse_command(j.at("command").get<std::string>());
  c.input_path = j.at("input").get<std::string>();
  c.output_path = j.at("output").get<std::string>();
  c.seed = j.at("seed").get<Seed>();
  c.levels = j.at("levels").get<std::vector<std::size_t>>();
  c.trading_day_seconds = j.at("trading_day_seconds").get<double>();
  c.thresholds.alpha_threshold = j.at("alpha_threshold").get<double>();
  c.thresholds.kurtosis_fraction = j.at("kurtosis_fraction").get<double>();
  c.thresholds.trading_day_seconds = c.trading_day_seconds;
  c.significance = j.at("significance").get<double>();
  c.max_lag = j.at("max_lag").get<std::size_t>();
  c.mc_pvalue = j.at("mc_pvalue").get<int>();
  c.on_bad_row = csv::parse_policy(j.at("on_bad_row").get<std::string>());
  c.threads = j.at("threads").get<unsigned>();
  c.sim_params = {j.at("alpha").get<double>(), j.at("beta").get<double>(),
                  j.at("gamma").get<double>(), j.at("delta").get<double>()};
  c.n_std = detail::read_number(j.at("n_std"));
  c.length = j.at("length").get<std::size_t>();
  c.format = j.at("format").get<std::string>() == "ticks" ? SimulateFormat::ticks
                                                           : SimulateFormat::returns;
  c.mean_dt = j.at("mean_dt").get<double>();
  c.start_value = j.at("start_value").get<double>();
  return c;
}

/// The configuration recorded in a run manifest.
[[nodiscard]] inline RunConfig config_from_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path + "'");
  return config_from_json(nlohmann::json::parse(in).at("config"));
}

// ---------------------------------------------------------------------------
// Artifact writers

namespace detail {

using csv::format_double;

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
    names_.push_back(name);
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

inline nlohmann::json fit_json(const FitResult& f) {
  return {{"n_conv", f.n_conv},
          {"alpha", f.params.alpha},
          {"beta", f.params.beta},
          {"gamma", f.params.gamma},
          {"delta", f.params.delta},
          {"ks", f.ks_statistic},
          {"p", f.p_value},
          {"reject", f.reject},
          {"sample_size", f.sample_size},
          {"log_likelihood", f.log_likelihood}};
}

inline nlohmann::json stats_json(const SeriesStats& s) {
  nlohmann::json j{{"count", s.count},
                   {"mean", s.mean},
                   {"variance", s.variance},
                   {"excess_kurtosis", s.excess_kurtosis}};
  j["mean_dt"] = s.mean_dt ? nlohmann::json(*s.mean_dt) : nlohmann::json(nullptr);
  return j;
}

inline std::string level_label(std::size_t n_conv, bool raw_label) {
  return raw_label && n_conv == 1 ? "0/raw" : std::to_string(n_conv);
}

inline std::string trajectory_csv(const AlphaTrajectory& t, const KurtosisPoints& k,
                                  bool with_kurtosis, bool raw_label) {
  std::ostringstream out;
  out << "n_conv,alpha,beta,gamma,delta,ks,p,reject";
  if (with_kurtosis) out << ",kurtosis";
  out << "\n";
  for (const auto& pt : t.points) {
    const FitResult& f = pt.fit;
    out << level_label(pt.n_conv, raw_label) << ',' << format_double(f.params.alpha) << ','
        << format_double(f.params.beta) << ',' << format_double(f.params.gamma) << ','
        << format_double(f.params.delta) << ',' << format_double(f.ks_statistic) << ','
        << format_double(f.p_value) << ',' << (f.reject ? "yes" : "no");
    if (with_kurtosis) {
      std::string kv;
      for (const auto& [level, value] : k) {
        if (level == pt.n_conv) kv = format_double(value);
      }
      out << ',' << kv;
    }
    out << "\n";
  }
  return out.str();
}

inline std::string kurtosis_csv(const KurtosisPoints& k) {
  std::ostringstream out;
  out << "n_conv,kurtosis\n";
  for (const auto& [level, value] : k) out << level << ',' << format_double(value) << "\n";
  return out.str();
}

inline std::string acf_csv(const AcfResult& r) {
  std::ostringstream out;
  out << "lag,coefficient,band\n";
  for (std::size_t i = 0; i < r.lags.size(); ++i) {
    out << r.lags[i] << ',' << format_double(r.coefficients[i]) << ',' << format_double(r.band)
        << "\n";
  }
  return out.str();
}

template <class T>
nlohmann::json or_null(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json crossover_json(const CrossoverReport& r) {
  nlohmann::json j{{"n_c", r.n_c}, {"criterion", r.criterion}};
  j["crossover_seconds"] = or_null(r.crossover_seconds);
  j["crossover_trading_days"] = or_null(r.crossover_trading_days);
  j["alpha_level"] = or_null(r.alpha_level);
  j["kurtosis_level"] = or_null(r.kurtosis_level);
  nlohmann::json kp = nlohmann::json::array();
  for (const auto& [level, value] : r.kurtosis_points) kp.push_back({{"n_conv", level}, {"k", value}});
  j["kurtosis_points"] = kp;
  return j;
}

inline nlohmann::json acf_json(const AcfResult& r, std::optional<double> mean_dt) {
  nlohmann::json j{{"n", r.n}, {"band", r.band}, {"persistence_lag", persistence_lag(r)}};
  j["persistence_seconds"] =
      mean_dt ? nlohmann::json(persistence_time(r, *mean_dt)) : nlohmann::json(nullptr);
  return j;
}

struct Loaded {
  csv::Input input;
  ReturnSeries returns;
};

inline Loaded load(const RunConfig& c) {
  Loaded l;
  l.input = csv::read_file(c.input_path, c.on_bad_row);
  l.returns = csv::to_returns(l.input);
  return l;
}

inline nlohmann::json input_json(const Loaded& l) {
  nlohmann::json j{{"kind", csv::kind_name(l.input.kind)},
                   {"rows", l.input.rows},
                   {"skipped_rows", l.input.skipped},
                   {"returns", l.returns.size()}};
  if (l.input.kind == csv::InputKind::ticks) {
    j["ticks_after_dedup"] = l.returns.size() + 1;
  }
  j["warnings"] = l.input.warnings;
  return j;
}

inline TrajectoryOptions trajectory_options(const RunConfig& c) {
  TrajectoryOptions t;
  t.evaluate.significance = c.significance;
  t.evaluate.mc_replicates = c.mc_pvalue;
  t.evaluate.seed = derive_seed(c.seed, "fit");
  t.threads = c.threads;
  return t;
}

inline CrossoverConfig crossover_config(const RunConfig& c) {
  CrossoverConfig cc = c.thresholds;
  cc.trading_day_seconds = c.trading_day_seconds;
  return cc;
}

// Runs crossover detection; a missing crossover is reported as data.
inline nlohmann::json crossover_or_note(const AlphaTrajectory& t, const KurtosisPoints& k,
                                        const ReturnSeries& r, const RunConfig& c) {
  try {
    return crossover_json(detect_crossover(t, k, r.mean_dt, crossover_config(c)));
  } catch (const NoCrossover& e) {
    return {{"n_c", nullptr}, {"note", e.what()}};
  }
}

inline void run_ingest(const RunConfig& c, Artifacts& out) {
  const Loaded l = load(c);
  std::ostringstream body;
  body << "return\n";
  for (double r : l.returns.returns) body << format_double(r) << "\n";
  out.write("returns.csv", body.str());
  nlohmann::json j = input_json(l);
  j["stats"] = stats_json(series_stats(l.returns));
  out.write_json("ingest.json", j);
}

inline void run_fit(const RunConfig& c, Artifacts& out) {
  const Loaded l = load(c);
  EvaluateOptions ev = trajectory_options(c).evaluate;
  const FitResult f = evaluate_fit(l.returns.returns, 1, ev);
  nlohmann::json j = fit_json(f);
  j["input"] = input_json(l);
  out.write_json("fit.json", j);
}

inline void run_trajectory(const RunConfig& c, Artifacts& out, bool with_crossover) {
  const Loaded l = load(c);
  const auto levels = c.effective_levels();
  const auto traj = alpha_trajectory(l.returns, levels, trajectory_options(c), c.input_path);
  const auto kurt = kurtosis_trajectory(l.returns, levels);
  out.write("trajectory.csv", trajectory_csv(traj, kurt, true, false));
  nlohmann::json j{{"warnings", traj.warnings}, {"input", input_json(l)}};
  if (with_crossover) {
    j["crossover"] = crossover_or_note(traj, kurt, l.returns, c);
    out.write_json("crossover.json", j);
  } else {
    out.write_json("trajectory.json", j);
  }
}

inline void run_acf(const RunConfig& c, Artifacts& out) {
  const Loaded l = load(c);
  const AcfResult a = acf(l.returns, c.max_lag);
  const AcfResult b = abs_acf(l.returns, c.max_lag);
  out.write("acf.csv", acf_csv(a));
  out.write("abs_acf.csv", acf_csv(b));
  out.write_json("acf.json", {{"returns", acf_json(a, l.returns.mean_dt)},
                              {"abs_returns", acf_json(b, l.returns.mean_dt)}});
}

inline void run_simulate(const RunConfig& c, Artifacts& out) {
  const auto raw = sample(c.sim_params, c.length, derive_seed(c.seed, "simulate"));
  const auto returns = hard_truncate(raw, c.n_std);
  std::ostringstream body;
  if (c.format == SimulateFormat::returns) {
    body << "return\n";
    for (double r : returns) body << format_double(r) << "\n";
    out.write("simulated.csv", body.str());
  } else {
    body << "timestamp,value\n";
    double log_level = std::log(c.start_value);
    body << format_double(0.0) << ',' << format_double(c.start_value) << "\n";
    for (std::size_t k = 0; k < returns.size(); ++k) {
      log_level += returns[k];
      const double v = std::exp(log_level);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("simulated index level left the floating-point range at tick " +
                          std::to_string(k + 1) + "; use a smaller --gamma");
      }
      body << format_double(static_cast<double>(k + 1) * c.mean_dt) << ',' << format_double(v)
           << "\n";
    }
    out.write("simulated.csv", body.str());
  }
  out.write_json("simulate.json", {{"generated", raw.size()},
                                   {"kept", returns.size()},
                                   {"n_std", detail::number(c.n_std)}});
}

inline void run_report(const RunConfig& c, Artifacts& out) {
  const Loaded l = load(c);
  const auto levels = c.effective_levels();
  const auto traj = alpha_trajectory(l.returns, levels, trajectory_options(c), c.input_path);
  const auto kurt = kurtosis_trajectory(l.returns, levels);
  out.write("table1.csv", trajectory_csv(traj, kurt, false, true));
  out.write("kurtosis.csv", kurtosis_csv(kurt));
  const std::size_t max_lag = std::min(c.max_lag, l.returns.size() - 1);
  const AcfResult a = acf(l.returns, max_lag);
  const AcfResult b = abs_acf(l.returns, max_lag);
  out.write("acf.csv", acf_csv(a));
  out.write("abs_acf.csv", acf_csv(b));

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : traj.points) {
    nlohmann::json row = fit_json(p.fit);
    row["label"] = level_label(p.n_conv, true);
    rows.push_back(row);
  }
  nlohmann::json j{{"input", input_json(l)},
                   {"stats", stats_json(series_stats(l.returns))},
                   {"table", rows},
                   {"warnings", traj.warnings},
                   {"crossover", crossover_or_note(traj, kurt, l.returns, c)},
                   {"acf", {{"returns", acf_json(a, l.returns.mean_dt)},
                            {"abs_returns", acf_json(b, l.returns.mean_dt)}}}};
  out.write_json("report.json", j);
}

inline std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const InvalidParameter*>(&e)) return "invalid-parameter";
  if (dynamic_cast<const QuadratureError*>(&e)) return "quadrature";
  if (dynamic_cast<const OptimizerError*>(&e)) return "optimizer";
  if (dynamic_cast<const DegenerateVariance*>(&e)) return "degenerate-variance";
  if (dynamic_cast<const EmptyResult*>(&e)) return "empty-result";
  if (dynamic_cast<const RejectionBudgetExceeded*>(&e)) return "rejection-budget";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const Error*>(&e)) return "error";
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return "io";
  return "internal";
}

}  // namespace detail

/// Executes one command, writing its artifacts and run.json into
/// config.output_path. Returns the process exit status; failures are reported
/// on `err` as one JSON object.
inline int run(const RunConfig& config, std::ostream& err = std::cerr) {
  const auto started = std::chrono::steady_clock::now();
  std::string stage = "config";
  try {
    config.validate();
    detail::Artifacts out(config.output_path);
    stage = std::string(command_name(config.command));
    switch (config.command) {
      case Command::ingest: detail::run_ingest(config, out); break;
      case Command::fit: detail::run_fit(config, out); break;
      case Command::trajectory: detail::run_trajectory(config, out, false); break;
      case Command::crossover: detail::run_trajectory(config, out, true); break;
      case Command::acf: detail::run_acf(config, out); break;
      case Command::simulate: detail::run_simulate(config, out); break;
      case Command::report: detail::run_report(config, out); break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    nlohmann::json manifest{{"library", "levy"},
                            {"version", kVersion},
                            {"config", to_json(config)},
                            {"argv", config.argv},
                            {"seed", config.seed},
                            {"artifacts", out.names()},
                            {"wall_time_seconds", wall}};
    out.write_json("run.json", manifest);
    return 0;
  } catch (const std::exception& e) {
    nlohmann::json report{{"status", "error"},
                          {"stage", stage},
                          {"kind", detail::error_kind(e)},
                          {"message", e.what()}};
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) report["line"] = pe->line();
    err << report.dump() << std::endl;
    return 1;
  }
}

}  // namespace levy::cli
