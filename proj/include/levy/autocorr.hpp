#pragma once

// Sample autocorrelation with white-noise bands.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "levy/error.hpp"
#include "levy/returns.hpp"

namespace levy {

struct AcfResult {
  std::vector<std::size_t> lags;    // 0..max_lag
  std::vector<double> coefficients;
  double band = 0.0;                // +-band under the white-noise null
  std::size_t n = 0;
};

struct AcfOptions {
  double band_multiplier = 1.96;
};

/// r(d) = sum_{k < n-d} (x_k - m)(x_{k+d} - m) / sum_k (x_k - m)^2
[[nodiscard]] inline AcfResult acf(std::span<const double> xs, std::size_t max_lag,
                                   const AcfOptions& opt = {}) {
  const std::size_t n = xs.size();
  if (max_lag < 1) throw InvalidParameter("acf: max_lag must be at least 1");
  if (n <= max_lag) {
    throw InvalidParameter("acf: series of length " + std::to_string(n) +
                           " is too short for max_lag " + std::to_string(max_lag));
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = xs[k] - mean;
  double c0 = 0.0;
  for (double v : d) c0 += v * v;
  if (!(c0 > 0.0)) throw DegenerateVariance("acf: series has zero variance");

  AcfResult r;
  r.n = n;
  r.band = opt.band_multiplier / std::sqrt(static_cast<double>(n));
  r.lags.resize(max_lag + 1);
  r.coefficients.resize(max_lag + 1);
  r.lags[0] = 0;
  r.coefficients[0] = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k) c += d[k] * d[k + lag];
    r.lags[lag] = lag;
    r.coefficients[lag] = c / c0;
  }
  return r;
}

[[nodiscard]] inline AcfResult acf(const ReturnSeries& series, std::size_t max_lag,
                                   const AcfOptions& opt = {}) {
  return acf(std::span<const double>(series.returns), max_lag, opt);
}

/// acf of |S_k|.
[[nodiscard]] inline AcfResult abs_acf(std::span<const double> xs, std::size_t max_lag,
                                       const AcfOptions& opt = {}) {
  std::vector<double> a(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) a[k] = std::abs(xs[k]);
  return acf(a, max_lag, opt);
}

[[nodiscard]] inline AcfResult abs_acf(const ReturnSeries& series, std::size_t max_lag,
                                       const AcfOptions& opt = {}) {
  return abs_acf(std::span<const double>(series.returns), max_lag, opt);
}

/// Largest L with every coefficient at lags 1..L above the band, as L * mean_dt.
[[nodiscard]] inline std::size_t persistence_lag(const AcfResult& r) {
  std::size_t lag = 0;
  while (lag + 1 < r.coefficients.size() && r.coefficients[lag + 1] > r.band) ++lag;
  return lag;
}

[[nodiscard]] inline double persistence_time(const AcfResult& r, double mean_dt) {
  if (!(mean_dt > 0.0)) throw InvalidParameter("persistence_time: mean_dt must be positive");
  return static_cast<double>(persistence_lag(r)) * mean_dt;
}

}  // namespace levy
