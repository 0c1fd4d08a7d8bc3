#pragma once

// Maximum-likelihood fitting of stable laws and the Kolmogorov-Smirnov test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "levy/error.hpp"
#include "levy/returns.hpp"
#include "levy/rng.hpp"
#include "levy/stable.hpp"
#include "levy/stable_table.hpp"

namespace levy {

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

/// P(K > x) for the limiting Kolmogorov distribution.
[[nodiscard]] inline double kolmogorov_survival(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.0) {
    // Theta-function form, fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * pi2 / (8.0 * x * x));
      cdf += term;
      if (term < 1e-17 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    q += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * q, 0.0, 1.0);
}

/// sup_x |F_n(x) - F(x)| over both sides of every ECDF step. `cdf_values[i]`
/// is F at `sorted[i]`; `sorted` must be nondecreasing.
[[nodiscard]] inline double ks_statistic_sorted(std::span<const double> sorted,
                                                std::span<const double> cdf_values) {
  const std::size_t n = sorted.size();
  if (n == 0) throw InvalidParameter("ks_statistic: empty sample");
  const auto dn = static_cast<double>(n);
  double d = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double f = cdf_values[i];
    const double below = static_cast<double>(i) / dn;     // F_n just left of x
    const double at = static_cast<double>(j + 1) / dn;    // F_n at x
    d = std::max({d, std::abs(below - f), std::abs(at - f)});
    i = j + 1;
  }
  return d;
}

/// K-S test of `samples` against a continuous CDF.
[[nodiscard]] inline KsResult ks_test(std::span<const double> samples,
                                      const std::function<double(double)>& cdf_fn,
                                      double significance = 0.05) {
  if (samples.empty()) throw InvalidParameter("ks_test: empty sample");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw InvalidParameter("ks_test: significance must lie in (0, 1)");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> f(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // The value of the first of a run of ties is reused for the whole run.
    f[i] = (i > 0 && sorted[i] == sorted[i - 1]) ? f[i - 1] : cdf_fn(sorted[i]);
  }
  KsResult r;
  r.statistic = ks_statistic_sorted(sorted, f);
  r.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(sorted.size())) * r.statistic);
  r.reject = r.p_value < significance;
  return r;
}

[[nodiscard]] inline KsResult ks_test(std::span<const double> samples, const StableParams& params,
                                      double significance = 0.05) {
  const TabulatedStable law(params);
  return ks_test(samples, [&](double x) { return law.cdf(x); }, significance);
}

// ---------------------------------------------------------------------------
// Moments

[[nodiscard]] inline double excess_kurtosis(std::span<const double> samples) {
  return series_stats(samples).excess_kurtosis;
}

// ---------------------------------------------------------------------------
// Quantile initializer

namespace detail {

struct QuantileSummary {
  double q05, q25, q50, q75, q95;
};

inline double sorted_quantile(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

inline QuantileSummary summarize(std::span<const double> sorted) {
  return {sorted_quantile(sorted, 0.05), sorted_quantile(sorted, 0.25),
          sorted_quantile(sorted, 0.50), sorted_quantile(sorted, 0.75),
          sorted_quantile(sorted, 0.95)};
}

// (q95 - q05) / (q75 - q25) of the symmetric law, on an alpha grid; it falls
// monotonically from heavy tails to the Gaussian value 2.4387.
struct SpreadRatioTable {
  std::vector<double> alphas;
  std::vector<double> ratios;

  static const SpreadRatioTable& get() {
    static const SpreadRatioTable table = [] {
      SpreadRatioTable t;
      for (int i = 5; i <= 20; ++i) {
        const double a = i / 10.0;
        const StandardStableTable law(a, 0.0);
        const double r = (law.quantile(0.95) - law.quantile(0.05)) /
                         (law.quantile(0.75) - law.quantile(0.25));
        t.alphas.push_back(a);
        t.ratios.push_back(r);
      }
      return t;
    }();
    return table;
  }

  [[nodiscard]] double alpha_for(double ratio) const {
    if (!(ratio < ratios.front())) return alphas.front();
    if (!(ratio > ratios.back())) return alphas.back();
    for (std::size_t i = 1; i < ratios.size(); ++i) {
      if (ratio >= ratios[i]) {
        const double w = (ratios[i - 1] - ratio) / (ratios[i - 1] - ratios[i]);
        return alphas[i - 1] + w * (alphas[i] - alphas[i - 1]);
      }
    }
    return alphas.back();
  }
};

}  // namespace detail

/// Quantile-matching starting point: alpha from the spread ratio, beta from the
/// quantile skewness relative to the totally skewed law, then scale and location.
[[nodiscard]] inline StableParams quantile_initial_guess(std::span<const double> samples) {
  if (samples.size() < 5) throw InvalidParameter("quantile_initial_guess: too few samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto q = detail::summarize(sorted);
  const double iqr = q.q75 - q.q25;
  const double spread = q.q95 - q.q05;
  if (!(iqr > 0.0) || !(spread > 0.0)) {
    throw DegenerateVariance("quantile_initial_guess: sample quantiles do not spread");
  }
  double alpha = detail::SpreadRatioTable::get().alpha_for(spread / iqr);
  alpha = std::clamp(alpha, 0.5, 2.0);

  double beta = 0.0;
  if (alpha < 1.95) {
    const double skew_sample = (q.q95 + q.q05 - 2.0 * q.q50) / spread;
    const StandardStableTable full(alpha, 1.0);
    const double skew_full = (full.quantile(0.95) + full.quantile(0.05) - 2.0 * full.quantile(0.5)) /
                             (full.quantile(0.95) - full.quantile(0.05));
    if (std::abs(skew_full) > 1e-6) beta = std::clamp(skew_sample / skew_full, -1.0, 1.0);
  }

  const StandardStableTable law(alpha, beta);
  const double gamma = iqr / (law.quantile(0.75) - law.quantile(0.25));
  const double loc0 = q.q50 - gamma * law.quantile(0.5);
  StableParams p{alpha, beta, gamma, 0.0};
  p.delta = detail::s1_location(alpha, beta, gamma, loc0);
  return p;
}

// ---------------------------------------------------------------------------
// Maximum likelihood

struct FitOptions {
  double alpha_floor = 0.1 + 1e-6;  // alpha is kept inside (0.1, 2]
  int max_evaluations = 800;
  int restarts = 1;
  double f_tol = 1e-10;             // on the mean negative log-likelihood
  double x_tol = 1e-6;
  TableOptions table{.with_cdf = false};
};

struct FitDiagnostics {
  StableParams initial;
  double initial_log_likelihood = 0.0;
  double log_likelihood = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

// Coordinates: (alpha, beta, log gamma, (loc0 - loc0_init) / gamma_init).
using Point = std::array<double, 4>;

struct BoxMap {
  double alpha_floor;
  double gamma0;
  double loc0;

  [[nodiscard]] double penalty(const Point& x) const {
    double excess = 0.0;
    excess += std::max(0.0, alpha_floor - x[0]) + std::max(0.0, x[0] - 2.0);
    excess += std::max(0.0, -1.0 - x[1]) + std::max(0.0, x[1] - 1.0);
    return excess;
  }

  [[nodiscard]] StableParams params(const Point& x) const {
    const double alpha = std::clamp(x[0], alpha_floor, 2.0);
    const double beta = std::clamp(x[1], -1.0, 1.0);
    const double gamma = std::exp(x[2]);
    const double loc = loc0 + x[3] * gamma0;
    StableParams p{alpha, beta, gamma, 0.0};
    p.delta = s1_location(alpha, beta, gamma, loc);
    return p;
  }
};

template <class F>
Point nelder_mead(F&& f, Point start, const Point& step, const FitOptions& opt, int& evals,
                  double& best_value, bool& converged) {
  std::array<Point, 5> simplex;
  std::array<double, 5> values;
  simplex[0] = start;
  for (int i = 0; i < 4; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step[i];
  }
  for (int i = 0; i < 5; ++i) values[i] = f(simplex[i]);
  evals += 5;
  converged = false;
  auto combine = [](const Point& a, const Point& b, double t) {
    Point r;
    for (int i = 0; i < 4; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };
  while (evals < opt.max_evaluations) {
    std::array<int, 5> order{0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::array<Point, 5> s2;
    std::array<double, 5> v2;
    for (int i = 0; i < 5; ++i) {
      s2[i] = simplex[order[i]];
      v2[i] = values[order[i]];
    }
    simplex = s2;
    values = v2;

    double size = 0.0;
    for (int i = 1; i < 5; ++i) {
      for (int k = 0; k < 4; ++k) size = std::max(size, std::abs(simplex[i][k] - simplex[0][k]));
    }
    if (std::abs(values[4] - values[0]) <= opt.f_tol && size <= opt.x_tol * 100.0) {
      converged = true;
      break;
    }
    if (size <= opt.x_tol) {
      converged = true;
      break;
    }

    Point centroid{0, 0, 0, 0};
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) centroid[k] += simplex[i][k] / 4.0;
    }
    const Point reflected = combine(centroid, simplex[4], -1.0);
    const double fr = f(reflected);
    ++evals;
    if (fr < values[0]) {
      const Point expanded = combine(centroid, simplex[4], -2.0);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        simplex[4] = expanded;
        values[4] = fe;
      } else {
        simplex[4] = reflected;
        values[4] = fr;
      }
      continue;
    }
    if (fr < values[3]) {
      simplex[4] = reflected;
      values[4] = fr;
      continue;
    }
    const bool outside = fr < values[4];
    const Point contracted = combine(centroid, outside ? reflected : simplex[4], 0.5);
    const double fc = f(contracted);
    ++evals;
    if (fc < (outside ? fr : values[4])) {
      simplex[4] = contracted;
      values[4] = fc;
      continue;
    }
    for (int i = 1; i < 5; ++i) {
      simplex[i] = combine(simplex[0], simplex[i], 0.5);
      values[i] = f(simplex[i]);
      ++evals;
    }
  }
  int best = 0;
  for (int i = 1; i < 5; ++i) {
    if (values[i] < values[best]) best = i;
  }
  best_value = values[best];
  return simplex[best];
}

}  // namespace detail

/// Sum of log densities, evaluated through a tabulated density.
[[nodiscard]] inline double stable_log_likelihood(std::span<const double> samples,
                                                  const StableParams& p,
                                                  const TableOptions& table = {.with_cdf = false}) {
  return TabulatedStable(p, table).log_likelihood(samples);
}

/// Maximum-likelihood stable parameters. Deterministic for identical input.
[[nodiscard]] inline StableParams fit_stable(std::span<const double> samples,
                                             const FitOptions& opt = {},
                                             FitDiagnostics* diagnostics = nullptr) {
  if (samples.size() < 100) {
    throw InvalidParameter("fit_stable: need at least 100 samples, got " +
                           std::to_string(samples.size()));
  }
  for (double x : samples) {
    if (!std::isfinite(x)) throw InvalidParameter("fit_stable: samples must be finite");
  }
  const StableParams init = quantile_initial_guess(samples);
  const auto n = static_cast<double>(samples.size());
  const detail::BoxMap box{opt.alpha_floor, init.gamma, detail::s0_location(init)};

  auto objective = [&](const detail::Point& x) {
    const StableParams p = box.params(x);
    const double ll = TabulatedStable(p, opt.table).log_likelihood(samples);
    const double value = -ll / n;
    return std::isfinite(value) ? value + 1e3 * box.penalty(x) * (1.0 + box.penalty(x))
                                : std::numeric_limits<double>::max();
  };

  detail::Point start{std::clamp(init.alpha, opt.alpha_floor, 2.0), init.beta, std::log(init.gamma), 0.0};
  const double f0 = objective(start);
  if (!(f0 < std::numeric_limits<double>::max())) {
    throw OptimizerError("fit_stable: likelihood is not finite at the initial guess (alpha=" +
                         std::to_string(init.alpha) + ", beta=" + std::to_string(init.beta) +
                         ", gamma=" + std::to_string(init.gamma) + ")");
  }
  int evals = 1;
  double best = f0;
  bool converged = false;
  detail::Point x = start;
  detail::Point step{0.1, 0.2, 0.1, 0.1};
  for (int round = 0; round <= opt.restarts; ++round) {
    double value = 0.0;
    const detail::Point candidate = detail::nelder_mead(objective, x, step, opt, evals, value, converged);
    if (value <= best) {
      best = value;
      x = candidate;
    }
    step = {0.02, 0.05, 0.02, 0.02};
  }
  if (best >= f0 && !converged) {
    throw OptimizerError("fit_stable: no improvement over the initial guess after " +
                         std::to_string(evals) + " likelihood evaluations");
  }
  const StableParams result = best < f0 ? box.params(x) : init;
  if (diagnostics) {
    diagnostics->initial = init;
    diagnostics->initial_log_likelihood = -f0 * n;
    diagnostics->log_likelihood = -std::min(best, f0) * n;
    diagnostics->evaluations = evals;
    diagnostics->converged = converged;
  }
  return result;
}

// ---------------------------------------------------------------------------
// One row of the fit table

struct FitResult {
  StableParams params;
  double ks_statistic = 0.0;
  double p_value = 1.0;
  bool reject_at_5pct = false;
  bool reject = false;  // at the configured significance
  std::size_t sample_size = 0;
  std::size_t n_conv = 1;
  double log_likelihood = 0.0;
};

struct EvaluateOptions {
  FitOptions fit;
  double significance = 0.05;
  int mc_replicates = 0;  // > 0: parametric-bootstrap p-value
  Seed seed = 0;
};

/// Parametric bootstrap p-value for a K-S statistic when the parameters were
/// estimated from the same data: refit each simulated sample and recompute D.
[[nodiscard]] inline double mc_pvalue(double statistic, const StableParams& fitted,
                                      std::size_t n, int replicates, Seed seed,
                                      const FitOptions& fit = {}) {
  if (replicates < 1) throw InvalidParameter("mc_pvalue: need at least one replicate");
  int exceed = 0;
  for (int b = 0; b < replicates; ++b) {
    const auto sim = sample(fitted, n, derive_seed(seed, static_cast<std::uint64_t>(b)));
    const StableParams refit = fit_stable(sim, fit);
    if (ks_test(sim, refit).statistic >= statistic) ++exceed;
  }
  return (1.0 + exceed) / (1.0 + replicates);
}

[[nodiscard]] inline FitResult evaluate_fit(std::span<const double> samples, std::size_t n_conv = 1,
                                            const EvaluateOptions& opt = {}) {
  FitDiagnostics diag;
  FitResult r;
  r.params = fit_stable(samples, opt.fit, &diag);
  const KsResult ks = ks_test(samples, r.params, opt.significance);
  r.ks_statistic = ks.statistic;
  r.p_value = ks.p_value;
  if (opt.mc_replicates > 0) {
    r.p_value = mc_pvalue(ks.statistic, r.params, samples.size(), opt.mc_replicates,
                          derive_seed(opt.seed, "mc-pvalue"), opt.fit);
  }
  r.reject_at_5pct = r.p_value < 0.05;
  r.reject = r.p_value < opt.significance;
  r.sample_size = samples.size();
  r.n_conv = n_conv;
  r.log_likelihood = diag.log_likelihood;
  return r;
}

}  // namespace levy
