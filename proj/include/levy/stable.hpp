#pragma once

// Alpha-stable laws in the Samorodnitsky-Taqqu parameterization:
//
//   log phi(t) = -gamma^a |t|^a [1 - i b tan(pi a / 2) sign t] + i delta t       (a != 1)
//   log phi(t) = -gamma |t| [1 + i b (2/pi) sign t ln|t|] + i delta t             (a == 1)
//
// Densities and distribution functions are computed by numerical inversion of
// phi, spliced onto the power-law tail once the two agree.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levy/detail/inversion.hpp"
#include "levy/error.hpp"
#include "levy/rng.hpp"

namespace levy {

/// Stability index alpha, skewness beta, scale gamma, location delta.
struct StableParams {
  double alpha = 2.0;
  double beta = 0.0;
  double gamma = 1.0;
  double delta = 0.0;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0)) {
      throw InvalidParameter("stable alpha must lie in (0, 2], got " + std::to_string(alpha));
    }
    if (!(beta >= -1.0 && beta <= 1.0)) {
      throw InvalidParameter("stable beta must lie in [-1, 1], got " + std::to_string(beta));
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw InvalidParameter("stable gamma must be positive, got " + std::to_string(gamma));
    }
    if (!std::isfinite(delta)) {
      throw InvalidParameter("stable delta must be finite");
    }
  }

  friend bool operator==(const StableParams&, const StableParams&) = default;
};

// Within this distance of alpha = 1 the alpha = 1 formula is used outright:
// tan(pi alpha / 2) has a pole there and the a != 1 branch loses all precision.
inline constexpr double kUnitBranchHalfWidth = 1e-2;

[[nodiscard]] inline bool uses_unit_branch(double alpha) noexcept {
  return std::abs(alpha - 1.0) < kUnitBranchHalfWidth;
}

/// Alpha actually used by every numerical routine (1 inside the unit branch).
[[nodiscard]] inline double effective_alpha(double alpha) noexcept {
  return uses_unit_branch(alpha) ? 1.0 : alpha;
}

/// beta * tan(pi alpha / 2), exactly zero at alpha = 2.
[[nodiscard]] inline double skew_factor(double alpha, double beta) noexcept {
  if (alpha == 2.0 || beta == 0.0) return 0.0;
  return beta * std::tan(std::numbers::pi * alpha / 2.0);
}

[[nodiscard]] inline std::complex<double> char_fn(const StableParams& p, double t) {
  p.validate();
  if (!std::isfinite(t)) throw InvalidParameter("char_fn: frequency must be finite");
  if (t == 0.0) return {1.0, 0.0};
  const double at = std::abs(t);
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  if (uses_unit_branch(p.alpha)) {
    const double scale = p.gamma * at;
    const double imag = -p.gamma * at * p.beta * (2.0 / std::numbers::pi) * sgn * std::log(at) +
                        p.delta * t;
    return std::polar(std::exp(-scale), imag);
  }
  const double scale = std::pow(p.gamma * at, p.alpha);
  const double imag = scale * skew_factor(p.alpha, p.beta) * sgn + p.delta * t;
  return std::polar(std::exp(-scale), imag);
}

namespace detail {

// Standardized law in the location-continuous "S0" form: for a != 1
//   Z0 = Z1 - beta tan(pi a / 2),  log phi(t) = -t^a + i beta tan(pi a/2) (t^a - t)
// which stays centred near the origin as a -> 1; the a == 1 form is the limit.
struct StandardStable {
  double alpha;
  double beta;
  bool unit;
  double skew;
  double cutoff_t;

  StandardStable(double a, double b)
      : alpha(effective_alpha(a)),
        beta(b),
        unit(uses_unit_branch(a)),
        skew(unit ? 0.0 : skew_factor(a, b)),
        cutoff_t(std::pow(41.0, 1.0 / alpha)) {}

  [[nodiscard]] CfSample at(double t) const {
    if (t <= 0.0) return {1.0, 0.0};
    if (unit) {
      return {std::exp(-t), -beta * (2.0 / std::numbers::pi) * t * std::log(t)};
    }
    const double ta = std::pow(t, alpha);
    return {std::exp(-ta), skew * (ta - t)};
  }

  [[nodiscard]] double cutoff() const { return cutoff_t; }

  [[nodiscard]] double phase_rate() const {
    if (unit) {
      return (2.0 / std::numbers::pi) * std::abs(beta) * (std::abs(std::log(cutoff_t)) + 1.0);
    }
    return std::abs(skew) * (alpha * std::max(1.0, std::pow(cutoff_t, alpha - 1.0)) + 1.0);
  }

  /// Constant C with P(Z > z) ~ C (1 + beta) z^-alpha.
  [[nodiscard]] double tail_constant() const {
    if (alpha == 2.0) return 0.0;
    if (unit) return 1.0 / std::numbers::pi;
    return std::tgamma(alpha) * std::sin(std::numbers::pi * alpha / 2.0) / std::numbers::pi;
  }

  [[nodiscard]] double tail_weight(bool right) const {
    return tail_constant() * (right ? 1.0 + beta : 1.0 - beta);
  }

  [[nodiscard]] double tail_pdf(double z) const {
    const double w = tail_weight(z >= 0.0);
    if (w == 0.0) return 0.0;
    return alpha * w * std::pow(std::abs(z), -1.0 - alpha);
  }

  [[nodiscard]] double tail_survival(double z) const {
    const double w = tail_weight(z >= 0.0);
    if (w == 0.0) return 0.0;
    return w * std::pow(std::abs(z), -alpha);
  }
};

/// Location of the S0 standardized variable: x = gamma * z0 + s0_location(p).
[[nodiscard]] inline double s0_location(const StableParams& p) {
  if (uses_unit_branch(p.alpha)) {
    return p.delta + p.beta * (2.0 / std::numbers::pi) * p.gamma * std::log(p.gamma);
  }
  return p.delta + p.gamma * skew_factor(p.alpha, p.beta);
}

/// Inverse of s0_location: S1 delta from the S0 location.
[[nodiscard]] inline double s1_location(double alpha, double beta, double gamma, double loc0) {
  if (uses_unit_branch(alpha)) {
    return loc0 - beta * (2.0 / std::numbers::pi) * gamma * std::log(gamma);
  }
  return loc0 - gamma * skew_factor(alpha, beta);
}

struct SpliceRadii {
  double left = std::numeric_limits<double>::infinity();
  double right = std::numeric_limits<double>::infinity();
};

struct SpliceCriteria {
  double rel_tol = 0.01;   // quadrature and power law agree within 1 % ...
  double abs_tol = 1e-8;   // ... and within the density tolerance
  double first = 4.0;
  double growth = 1.15;
  double last = 1e3;
};

// Smallest scan point (and its successor) beyond which the power-law tail is
// indistinguishable from the inversion integral. If the tolerance is never met
// within the range the integral can still be evaluated, the splice falls at the
// last feasible point.
template <class Eval>
double find_splice(const StandardStable& law, bool right, const SpliceCriteria& c, Eval&& eval,
                   const InversionOptions& opt) {
  if (law.tail_weight(right) <= 1e-12) return std::numeric_limits<double>::infinity();
  const double sign = right ? 1.0 : -1.0;
  bool previous_ok = false;
  double previous_z = 0.0;
  double last_feasible = std::numeric_limits<double>::infinity();
  for (double z = c.first; z <= c.last; z *= c.growth) {
    if (!inversion_feasible(law, sign * z, opt)) break;
    last_feasible = z;
    const double q = eval(sign * z);
    const double a = law.tail_pdf(sign * z);
    const double diff = std::abs(q - a);
    const bool ok = diff <= c.rel_tol * a && diff <= c.abs_tol;
    if (ok && previous_ok) return previous_z;
    previous_ok = ok;
    previous_z = z;
  }
  return last_feasible;
}

class SpliceCache {
 public:
  static SpliceCache& instance() {
    static SpliceCache cache;
    return cache;
  }

  SpliceRadii get(const StandardStable& law, const InversionOptions& opt) {
    const auto key = std::make_pair(bits(law.alpha), bits(law.beta));
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    SpliceCriteria criteria;
    criteria.abs_tol = opt.abs_tol;
    auto eval = [&](double z) { return invert_density(law, z, opt); };
    SpliceRadii r;
    r.right = find_splice(law, true, criteria, eval, opt);
    r.left = find_splice(law, false, criteria, eval, opt);
    std::lock_guard lock(mutex_);
    if (entries_.size() > 512) entries_.clear();
    entries_.emplace(key, r);
    return r;
  }

 private:
  static std::uint64_t bits(double v) {
    std::uint64_t u = 0;
    std::memcpy(&u, &v, sizeof u);
    return u;
  }

  std::mutex mutex_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, SpliceRadii> entries_;
};

inline double standard_pdf(const StandardStable& law, const SpliceRadii& splice, double z,
                           const InversionOptions& opt) {
  const double radius = z >= 0.0 ? splice.right : splice.left;
  if (std::abs(z) >= radius) return law.tail_pdf(z);
  return std::max(0.0, invert_density(law, z, opt));
}

inline double standard_cdf(const StandardStable& law, const SpliceRadii& splice, double z,
                           const InversionOptions& opt) {
  if (z >= splice.right) return 1.0 - law.tail_survival(z);
  if (-z >= splice.left) return law.tail_survival(z);
  return std::clamp(invert_cdf(law, z, opt), 0.0, 1.0);
}

inline void require_strictly_increasing(std::span<const double> xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) throw InvalidParameter("abscissae must be finite");
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw InvalidParameter("abscissae must be strictly increasing (index " +
                             std::to_string(i) + ")");
    }
  }
}

}  // namespace detail

struct DensityOptions {
  double abs_tol = 1e-8;
  std::size_t max_panels = 200000;

  [[nodiscard]] detail::InversionOptions inversion() const {
    detail::InversionOptions o;
    o.abs_tol = abs_tol;
    o.max_panels = max_panels;
    return o;
  }
};

/// Densities and distribution-function values sampled on a grid.
struct DensityGrid {
  std::vector<double> xs;
  std::vector<double> pdf_values;
  std::vector<double> cdf_values;

  /// Trapezoidal integral of pdf_values over xs.
  [[nodiscard]] double trapezoid_mass() const {
    double mass = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      mass += 0.5 * (pdf_values[i] + pdf_values[i - 1]) * (xs[i] - xs[i - 1]);
    }
    return mass;
  }
};

[[nodiscard]] inline DensityGrid pdf(const StableParams& p, std::span<const double> xs,
                                     const DensityOptions& options = {}) {
  p.validate();
  detail::require_strictly_increasing(xs);
  const detail::StandardStable law(p.alpha, p.beta);
  const auto opt = options.inversion();
  const auto splice = detail::SpliceCache::instance().get(law, opt);
  const double loc0 = detail::s0_location(p);

  DensityGrid grid;
  grid.xs.assign(xs.begin(), xs.end());
  grid.pdf_values.reserve(xs.size());
  grid.cdf_values.reserve(xs.size());
  double running = 0.0;
  for (double x : xs) {
    const double z = (x - loc0) / p.gamma;
    grid.pdf_values.push_back(detail::standard_pdf(law, splice, z, opt) / p.gamma);
    // Running maximum keeps quadrature noise from breaking monotonicity.
    running = std::max(running, detail::standard_cdf(law, splice, z, opt));
    grid.cdf_values.push_back(running);
  }
  return grid;
}

[[nodiscard]] inline double density(const StableParams& p, double x,
                                    const DensityOptions& options = {}) {
  const double xs[] = {x};
  return pdf(p, xs, options).pdf_values.front();
}

[[nodiscard]] inline double cdf(const StableParams& p, double x,
                                const DensityOptions& options = {}) {
  p.validate();
  if (std::isnan(x)) throw InvalidParameter("cdf: abscissa is NaN");
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  const detail::StandardStable law(p.alpha, p.beta);
  const auto opt = options.inversion();
  const auto splice = detail::SpliceCache::instance().get(law, opt);
  return detail::standard_cdf(law, splice, (x - detail::s0_location(p)) / p.gamma, opt);
}

/// Power-law approximation alpha C (1 +- beta) gamma^alpha |x - delta|^(-1-alpha),
/// valid for |x - delta| >> gamma. The sign of x - delta picks the tail.
[[nodiscard]] inline double tail_density(const StableParams& p, double x) {
  p.validate();
  if (p.alpha == 2.0) throw DomainError("tail_density: the Gaussian case has no power-law tail");
  const detail::StandardStable law(p.alpha, p.beta);
  const double u = x - p.delta;
  const double w = law.tail_weight(u >= 0.0);
  return law.alpha * w * std::pow(p.gamma, law.alpha) * std::pow(std::abs(u), -1.0 - law.alpha);
}

/// One variate by the Chambers-Mallows-Stuck transform.
[[nodiscard]] inline double draw(const StableParams& p, Rng& rng) {
  const double half_pi = std::numbers::pi / 2.0;
  const double v = rng.uniform(-half_pi, half_pi);
  const double w = rng.exponential();
  if (uses_unit_branch(p.alpha)) {
    const double shifted = half_pi + p.beta * v;
    const double z = (2.0 / std::numbers::pi) *
                     (shifted * std::tan(v) - p.beta * std::log(half_pi * w * std::cos(v) / shifted));
    return p.gamma * z + (2.0 / std::numbers::pi) * p.beta * p.gamma * std::log(p.gamma) + p.delta;
  }
  const double a = p.alpha;
  const double skew = skew_factor(a, p.beta);
  const double b = std::atan(skew) / a;
  const double s = std::pow(1.0 + skew * skew, 1.0 / (2.0 * a));
  const double z = s * std::sin(a * (v + b)) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos(v - a * (v + b)) / w, (1.0 - a) / a);
  return p.gamma * z + p.delta;
}

[[nodiscard]] inline std::vector<double> sample(const StableParams& p, std::size_t n, Seed seed) {
  p.validate();
  if (n == 0) throw InvalidParameter("sample: n must be at least 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = draw(p, rng);
  return out;
}

}  // namespace levy
