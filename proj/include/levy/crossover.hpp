#pragma once

// Fits and kurtosis across aggregation levels, crossover detection, and the
// truncated-simulation experiment.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "levy/error.hpp"
#include "levy/estimation.hpp"
#include "levy/returns.hpp"
#include "levy/rng.hpp"
#include "levy/stable.hpp"
#include "levy/tlf.hpp"

namespace levy {

inline constexpr double kTradingDaySeconds = 6.5 * 3600.0;

struct TrajectoryPoint {
  std::size_t n_conv = 1;
  FitResult fit;
};

struct AlphaTrajectory {
  std::vector<TrajectoryPoint> points;
  std::string source_label;
  std::vector<std::string> warnings;  // skipped levels
};

struct TrajectoryOptions {
  EvaluateOptions evaluate;
  std::size_t min_points = 100;
  unsigned threads = 0;  // 0: hardware concurrency
};

using KurtosisPoints = std::vector<std::pair<std::size_t, double>>;

/// Report levels followed by the dense crossover grid, merged and sorted.
[[nodiscard]] inline std::vector<std::size_t> default_levels() {
  std::vector<std::size_t> levels{1};
  for (std::size_t l = 10; l <= 150; l += 10) levels.push_back(l);
  for (std::size_t l = 100; l <= 3000; l += 100) levels.push_back(l);
  levels.push_back(1200);
  levels.push_back(2500);
  levels.push_back(2700);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

namespace detail {

inline void require_levels(const std::vector<std::size_t>& levels) {
  if (levels.empty()) throw InvalidParameter("no aggregation levels given");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw InvalidParameter("aggregation levels must be >= 1");
    if (i > 0 && levels[i] <= levels[i - 1]) {
      throw InvalidParameter("aggregation levels must be strictly increasing");
    }
  }
}

// Runs task(i) for i in [0, n) on up to `threads` workers; the first exception
// is rethrown after all workers finish.
template <class Task>
void parallel_for(std::size_t n, unsigned threads, Task&& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) task(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

/// One fit per level on the aggregated series. Levels leaving fewer than
/// `min_points` blocks are skipped with a warning.
[[nodiscard]] inline AlphaTrajectory alpha_trajectory(const ReturnSeries& series,
                                                      const std::vector<std::size_t>& levels,
                                                      const TrajectoryOptions& opt = {},
                                                      std::string label = {}) {
  detail::require_levels(levels);
  AlphaTrajectory traj;
  traj.source_label = std::move(label);
  std::vector<std::size_t> usable;
  for (std::size_t level : levels) {
    if (series.size() / level < opt.min_points) {
      traj.warnings.push_back("level " + std::to_string(level) + " skipped: " +
                              std::to_string(series.size() / level) + " aggregated points < " +
                              std::to_string(opt.min_points));
    } else {
      usable.push_back(level);
    }
  }
  if (usable.empty()) throw InvalidParameter("alpha_trajectory: every level was skipped");
  traj.points.resize(usable.size());
  detail::parallel_for(usable.size(), opt.threads, [&](std::size_t i) {
    const ReturnSeries agg = convolve_returns(series, usable[i]);
    EvaluateOptions ev = opt.evaluate;
    ev.seed = derive_seed(opt.evaluate.seed, static_cast<std::uint64_t>(usable[i]));
    traj.points[i] = {usable[i], evaluate_fit(agg.returns, usable[i], ev)};
  });
  return traj;
}

[[nodiscard]] inline KurtosisPoints kurtosis_trajectory(const ReturnSeries& series,
                                                        const std::vector<std::size_t>& levels,
                                                        std::size_t min_points = 100) {
  detail::require_levels(levels);
  KurtosisPoints out;
  for (std::size_t level : levels) {
    if (series.size() / level < min_points) continue;
    out.emplace_back(level, excess_kurtosis(convolve_returns(series, level).returns));
  }
  if (out.empty()) throw InvalidParameter("kurtosis_trajectory: every level was skipped");
  return out;
}

struct CrossoverConfig {
  double alpha_threshold = 1.99;
  double kurtosis_fraction = 0.05;  // k(m) <= fraction * k(first level)
  double trading_day_seconds = kTradingDaySeconds;
};

struct CrossoverReport {
  std::size_t n_c = 0;
  std::optional<double> crossover_seconds;
  std::optional<double> crossover_trading_days;
  std::string criterion;
  std::optional<std::size_t> alpha_level;     // where the alpha rule first holds for good
  std::optional<std::size_t> kurtosis_level;  // likewise for the kurtosis rule
  KurtosisPoints kurtosis_points;
};

/// Smallest level from which the rule holds at every larger level, if any.
template <class Rule>
std::optional<std::size_t> persistent_level(const std::vector<std::size_t>& levels, Rule&& holds) {
  std::optional<std::size_t> first;
  for (std::size_t i = levels.size(); i-- > 0;) {
    if (!holds(i)) break;
    first = levels[i];
  }
  return first;
}

[[nodiscard]] inline CrossoverReport detect_crossover(const AlphaTrajectory& alpha_traj,
                                                      const KurtosisPoints& kurt_points,
                                                      std::optional<double> mean_dt,
                                                      const CrossoverConfig& config = {}) {
  if (alpha_traj.points.empty() && kurt_points.empty()) {
    throw InvalidParameter("detect_crossover: empty trajectories");
  }
  if (!(config.trading_day_seconds > 0.0)) {
    throw InvalidParameter("detect_crossover: trading day length must be positive");
  }
  CrossoverReport r;
  r.kurtosis_points = kurt_points;

  std::vector<std::size_t> alevels;
  for (const auto& p : alpha_traj.points) alevels.push_back(p.n_conv);
  r.alpha_level = persistent_level(alevels, [&](std::size_t i) {
    return alpha_traj.points[i].fit.params.alpha >= config.alpha_threshold;
  });

  if (!kurt_points.empty()) {
    std::vector<std::size_t> klevels;
    for (const auto& [level, k] : kurt_points) klevels.push_back(level);
    const double k1 = kurt_points.front().second;
    const double limit = config.kurtosis_fraction * k1;
    r.kurtosis_level = persistent_level(klevels, [&](std::size_t i) {
      return k1 <= 0.0 || kurt_points[i].second <= limit;
    });
  }

  if (!r.alpha_level && !r.kurtosis_level) {
    throw NoCrossover("no crossover: neither alpha >= " + std::to_string(config.alpha_threshold) +
                      " nor the kurtosis collapse holds at the largest swept level");
  }
  if (r.alpha_level && (!r.kurtosis_level || *r.alpha_level <= *r.kurtosis_level)) {
    r.n_c = *r.alpha_level;
    r.criterion = "alpha >= " + std::to_string(config.alpha_threshold) + " from this level on";
    if (r.kurtosis_level && *r.kurtosis_level == *r.alpha_level) r.criterion += "; kurtosis also collapsed";
  } else {
    r.n_c = *r.kurtosis_level;
    r.criterion = "excess kurtosis <= " + std::to_string(config.kurtosis_fraction) +
                  " x level-" + std::to_string(kurt_points.front().first) + " value from this level on";
  }
  if (mean_dt) {
    r.crossover_seconds = static_cast<double>(r.n_c) * *mean_dt;
    r.crossover_trading_days = *r.crossover_seconds / config.trading_day_seconds;
  }
  return r;
}

// ---------------------------------------------------------------------------

struct ExperimentCell {
  std::size_t length = 0;
  double n_std = std::numeric_limits<double>::infinity();
  std::size_t truncated_length = 0;
  AlphaTrajectory trajectory;
  std::string error;  // nonempty when this cell failed
};

/// For each length: draw a stable sample, cut it at n_std sample standard
/// deviations, and fit across levels. Cells get independent derived seeds.
[[nodiscard]] inline std::vector<ExperimentCell> truncation_experiment(
    const StableParams& gen, const std::vector<std::size_t>& lengths, double n_std,
    const std::vector<std::size_t>& levels, Seed seed, const TrajectoryOptions& opt = {}) {
  gen.validate();
  if (gen.beta != 0.0) throw InvalidParameter("truncation_experiment: generator must be symmetric");
  if (lengths.empty()) throw InvalidParameter("truncation_experiment: no lengths");
  detail::require_levels(levels);
  std::vector<ExperimentCell> cells(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    ExperimentCell& cell = cells[i];
    cell.length = lengths[i];
    cell.n_std = n_std;
    try {
      const Seed cell_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
      const auto raw = sample(gen, lengths[i], derive_seed(cell_seed, "sample"));
      ReturnSeries series;
      series.returns = hard_truncate(raw, n_std);
      cell.truncated_length = series.size();
      TrajectoryOptions cell_opt = opt;
      cell_opt.evaluate.seed = derive_seed(cell_seed, "fit");
      cell.trajectory = alpha_trajectory(series, levels, cell_opt,
                                         "length=" + std::to_string(lengths[i]));
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }
  return cells;
}

}  // namespace levy
