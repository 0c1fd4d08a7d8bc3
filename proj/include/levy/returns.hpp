#pragma once

// Tick series, log returns, block aggregation and moment statistics.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levy/error.hpp"

namespace levy {

/// Index levels Y_k with optional event times in seconds.
struct TickSeries {
  std::vector<double> timestamps;  // empty, or one per value
  std::vector<double> values;

  [[nodiscard]] bool has_timestamps() const { return !timestamps.empty(); }
  [[nodiscard]] std::size_t size() const { return values.size(); }

  void validate() const {
    if (!timestamps.empty() && timestamps.size() != values.size()) {
      throw InvalidParameter("tick series: " + std::to_string(timestamps.size()) +
                             " timestamps for " + std::to_string(values.size()) + " values");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw DomainError("tick series: value at index " + std::to_string(i) +
                          " is not a positive finite number");
      }
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
      if (timestamps[i] < timestamps[i - 1]) {
        throw InvalidParameter("tick series: timestamps decrease at index " + std::to_string(i));
      }
    }
  }
};

/// Returns S_k, possibly aggregated in blocks of n_conv.
struct ReturnSeries {
  std::vector<double> returns;
  std::size_t n_conv = 1;
  std::optional<double> mean_dt;  // seconds between underlying (level-1) fluctuations

  [[nodiscard]] std::size_t size() const { return returns.size(); }
};

struct SeriesStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // divisor N
  double excess_kurtosis = 0.0;
  std::optional<double> mean_dt;
};

/// Drops every value equal to its predecessor (consecutive repeats only).
[[nodiscard]] inline TickSeries dedup_ticks(const TickSeries& ticks) {
  ticks.validate();
  if (ticks.values.empty()) throw InvalidParameter("dedup_ticks: empty series");
  TickSeries out;
  out.values.reserve(ticks.size());
  if (ticks.has_timestamps()) out.timestamps.reserve(ticks.size());
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    if (i > 0 && ticks.values[i] == ticks.values[i - 1]) continue;
    out.values.push_back(ticks.values[i]);
    if (ticks.has_timestamps()) out.timestamps.push_back(ticks.timestamps[i]);
  }
  return out;
}

/// S_k = ln Y_{k+1} - ln Y_k.
[[nodiscard]] inline ReturnSeries log_returns(const TickSeries& ticks) {
  ticks.validate();
  if (ticks.size() < 2) throw InvalidParameter("log_returns: need at least two ticks");
  ReturnSeries out;
  out.returns.resize(ticks.size() - 1);
  double prev = std::log(ticks.values[0]);
  for (std::size_t k = 0; k + 1 < ticks.size(); ++k) {
    const double next = std::log(ticks.values[k + 1]);
    out.returns[k] = next - prev;
    prev = next;
  }
  if (ticks.has_timestamps()) {
    out.mean_dt = (ticks.timestamps.back() - ticks.timestamps.front()) /
                  static_cast<double>(ticks.size() - 1);
  }
  return out;
}

/// Sums of consecutive blocks of n_conv returns; a trailing partial block is dropped.
[[nodiscard]] inline ReturnSeries convolve_returns(const ReturnSeries& series, std::size_t n_conv) {
  if (n_conv < 1) throw InvalidParameter("convolve_returns: n_conv must be at least 1");
  if (series.n_conv != 1) {
    throw InvalidParameter("convolve_returns: input must be at aggregation level 1, got " +
                           std::to_string(series.n_conv));
  }
  const std::size_t blocks = series.size() / n_conv;
  if (blocks == 0) {
    throw InvalidParameter("convolve_returns: " + std::to_string(series.size()) +
                           " returns do not fill one block of " + std::to_string(n_conv));
  }
  ReturnSeries out;
  out.n_conv = n_conv;
  out.mean_dt = series.mean_dt;
  out.returns.resize(blocks);
  for (std::size_t j = 0; j < blocks; ++j) {
    double s = 0.0;
    const double* block = series.returns.data() + j * n_conv;
    for (std::size_t i = 0; i < n_conv; ++i) s += block[i];
    out.returns[j] = s;
  }
  return out;
}

/// Mean, variance and excess kurtosis, all with divisor N.
[[nodiscard]] inline SeriesStats series_stats(std::span<const double> xs) {
  if (xs.size() < 4) {
    throw InvalidParameter("series_stats: need at least 4 values, got " + std::to_string(xs.size()));
  }
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw DegenerateVariance("series_stats: variance is zero");
  SeriesStats s;
  s.count = xs.size();
  s.mean = mean;
  s.variance = m2;
  s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return s;
}

[[nodiscard]] inline SeriesStats series_stats(const ReturnSeries& series) {
  SeriesStats s = series_stats(std::span<const double>(series.returns));
  s.mean_dt = series.mean_dt;
  return s;
}

[[nodiscard]] inline SeriesStats series_stats(const TickSeries& ticks) {
  SeriesStats s = series_stats(std::span<const double>(ticks.values));
  if (ticks.size() >= 2 && ticks.has_timestamps()) {
    s.mean_dt = (ticks.timestamps.back() - ticks.timestamps.front()) /
                static_cast<double>(ticks.size() - 1);
  }
  return s;
}

}  // namespace levy
