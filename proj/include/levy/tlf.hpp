#pragma once

// Truncated Levy flights: the stable law cut off abruptly at +-l, and
// Koponen's smoothly (exponentially) truncated law.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "levy/detail/inversion.hpp"
#include "levy/error.hpp"
#include "levy/rng.hpp"
#include "levy/stable.hpp"

namespace levy {

// ---------------------------------------------------------------------------
// Hard truncation

struct HardTLFParams {
  StableParams base;   // symmetric
  double cutoff_l = std::numeric_limits<double>::infinity();
  double norm_c = 1.0;  // 1 / P(-l <= X <= l) under the base law

  void validate() const {
    base.validate();
    if (base.beta != 0.0) throw InvalidParameter("hard TLF: base law must be symmetric (beta = 0)");
    if (!(cutoff_l > 0.0)) throw InvalidParameter("hard TLF: cutoff must be positive");
    if (!(norm_c >= 1.0) || !std::isfinite(norm_c)) {
      throw InvalidParameter("hard TLF: normalization constant must be finite and >= 1");
    }
  }
};

/// Parameters for a cutoff at +-l, with c computed from the base CDF.
[[nodiscard]] inline HardTLFParams make_hard_tlf(const StableParams& base, double cutoff_l,
                                                 const DensityOptions& options = {}) {
  base.validate();
  if (!(cutoff_l > 0.0)) throw InvalidParameter("hard TLF: cutoff must be positive");
  HardTLFParams p;
  p.base = base;
  p.cutoff_l = cutoff_l;
  if (std::isinf(cutoff_l)) {
    p.norm_c = 1.0;
  } else {
    const double mass = cdf(base, base.delta + cutoff_l, options) -
                        cdf(base, base.delta - cutoff_l, options);
    if (!(mass > 0.0)) throw DomainError("hard TLF: no probability mass inside the cutoff");
    p.norm_c = std::max(1.0, 1.0 / mass);
  }
  p.validate();
  return p;
}

/// Population standard deviation (divisor N).
[[nodiscard]] inline double population_sd(std::span<const double> xs) {
  if (xs.empty()) throw InvalidParameter("standard deviation of an empty sample");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

/// Cutoff l = n_std * sd(reference), the sd taken from the reference sample.
[[nodiscard]] inline HardTLFParams hard_tlf_from_sample(const StableParams& base,
                                                        std::span<const double> reference,
                                                        double n_std,
                                                        const DensityOptions& options = {}) {
  if (!(n_std > 0.0)) throw InvalidParameter("n_std must be positive");
  return make_hard_tlf(base, n_std * population_sd(reference), options);
}

/// Elements with |x| <= n_std * sd(samples), in their original order.
[[nodiscard]] inline std::vector<double> hard_truncate(std::span<const double> samples,
                                                       double n_std) {
  if (samples.empty()) throw InvalidParameter("hard_truncate: empty sample");
  if (!(n_std > 0.0)) throw InvalidParameter("hard_truncate: n_std must be positive");
  if (std::isinf(n_std)) return {samples.begin(), samples.end()};
  const double threshold = n_std * population_sd(samples);
  std::vector<double> kept;
  kept.reserve(samples.size());
  for (double x : samples) {
    if (std::abs(x) <= threshold) kept.push_back(x);
  }
  if (kept.empty()) {
    throw EmptyResult("hard_truncate: every element exceeds " + std::to_string(threshold));
  }
  return kept;
}

inline constexpr double kMinAcceptance = 1e-6;

/// Rejection sampling from the base law, accepting |x - delta| <= l.
[[nodiscard]] inline std::vector<double> sample_hard_tlf(const HardTLFParams& p, std::size_t n,
                                                         Seed seed) {
  p.validate();
  if (n == 0) throw InvalidParameter("sample_hard_tlf: n must be at least 1");
  if (1.0 / p.norm_c < kMinAcceptance) {
    throw RejectionBudgetExceeded("hard TLF: acceptance probability " +
                                  std::to_string(1.0 / p.norm_c) + " is below " +
                                  std::to_string(kMinAcceptance));
  }
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  std::size_t attempts = 0;
  const std::size_t floor_attempts = 10'000'000;
  while (out.size() < n) {
    const double x = draw(p.base, rng);
    ++attempts;
    if (std::abs(x - p.base.delta) <= p.cutoff_l) out.push_back(x);
    if (attempts >= floor_attempts &&
        static_cast<double>(out.size()) < kMinAcceptance * static_cast<double>(attempts)) {
      throw RejectionBudgetExceeded("hard TLF: observed acceptance rate below " +
                                    std::to_string(kMinAcceptance));
    }
  }
  return out;
}

/// c P_L(x) inside the cutoff, 0 outside.
[[nodiscard]] inline DensityGrid hard_tlf_pdf(const HardTLFParams& p, std::span<const double> xs,
                                              const DensityOptions& options = {}) {
  p.validate();
  DensityGrid grid = pdf(p.base, xs, options);
  const double lo_cdf = cdf(p.base, p.base.delta - p.cutoff_l, options);
  for (std::size_t i = 0; i < grid.xs.size(); ++i) {
    const double u = grid.xs[i] - p.base.delta;
    if (std::abs(u) > p.cutoff_l) {
      grid.pdf_values[i] = 0.0;
      grid.cdf_values[i] = u < 0.0 ? 0.0 : 1.0;
    } else {
      grid.pdf_values[i] *= p.norm_c;
      grid.cdf_values[i] = std::clamp((grid.cdf_values[i] - lo_cdf) * p.norm_c, 0.0, 1.0);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Exponential (Koponen) truncation

struct KoponenParams {
  double scale_c = 1.0;
  double alpha = 1.5;
  double lambda = 0.0;

  void validate() const {
    if (!(scale_c > 0.0) || !std::isfinite(scale_c)) {
      throw InvalidParameter("Koponen: scale c must be positive");
    }
    if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidParameter("Koponen: alpha must lie in (0, 2)");
    if (alpha == 1.0) {
      throw InvalidParameter("Koponen: alpha = 1 is excluded (the cutoff form has no stable limit there)");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw InvalidParameter("Koponen: lambda must be finite and >= 0");
    }
  }
};

namespace detail {

inline double koponen_log_cf(const KoponenParams& p, double t) {
  const double at = std::abs(t);
  if (at == 0.0) return 0.0;
  const double a = p.alpha;
  const double angle = p.lambda == 0.0 ? std::numbers::pi / 2.0 : std::atan(at / p.lambda);
  const double bracket = std::pow(p.lambda, a) -
                         std::pow(at * at + p.lambda * p.lambda, a / 2.0) * std::cos(a * angle);
  return std::pow(p.scale_c, a) / std::cos(std::numbers::pi * a / 2.0) * bracket;
}

// Real, even characteristic function in the form the inversion routines expect.
struct KoponenCf {
  KoponenParams p;
  double cutoff_t;

  explicit KoponenCf(const KoponenParams& params) : p(params), cutoff_t(1.0) {
    while (koponen_log_cf(p, cutoff_t) > -41.0 && cutoff_t < 1e12) cutoff_t *= 1.25;
  }

  [[nodiscard]] CfSample at(double t) const { return {std::exp(koponen_log_cf(p, t)), 0.0}; }
  [[nodiscard]] double cutoff() const { return cutoff_t; }
  [[nodiscard]] double phase_rate() const { return 0.0; }
};

}  // namespace detail

/// log phi(t) = c^a / cos(pi a / 2) [lambda^a - (t^2 + lambda^2)^(a/2) cos(a arctan(|t| / lambda))]
[[nodiscard]] inline std::complex<double> koponen_log_char_fn(const KoponenParams& p, double t) {
  p.validate();
  if (!std::isfinite(t)) throw InvalidParameter("Koponen: frequency must be finite");
  return {detail::koponen_log_cf(p, t), 0.0};
}

[[nodiscard]] inline DensityGrid koponen_pdf(const KoponenParams& p, std::span<const double> xs,
                                             const DensityOptions& options = {}) {
  p.validate();
  detail::require_strictly_increasing(xs);
  const detail::KoponenCf cf(p);
  const auto opt = options.inversion();
  DensityGrid grid;
  grid.xs.assign(xs.begin(), xs.end());
  double running = 0.0;
  for (double x : xs) {
    grid.pdf_values.push_back(std::max(0.0, detail::invert_density(cf, x, opt)));
    running = std::max(running, std::clamp(detail::invert_cdf(cf, x, opt), 0.0, 1.0));
    grid.cdf_values.push_back(running);
  }
  return grid;
}

/// Variance, -d^2/dt^2 log phi at t = 0: -c^a a (a - 1) lambda^(a - 2) / cos(pi a / 2).
[[nodiscard]] inline double koponen_variance(const KoponenParams& p) {
  p.validate();
  if (p.lambda == 0.0) return std::numeric_limits<double>::infinity();
  const double a = p.alpha;
  return -std::pow(p.scale_c, a) * a * (a - 1.0) * std::pow(p.lambda, a - 2.0) /
         std::cos(std::numbers::pi * a / 2.0);
}

}  // namespace levy
