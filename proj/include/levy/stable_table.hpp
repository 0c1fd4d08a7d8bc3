#pragma once

// Tabulated stable laws: the density of the standardized law on a uniform grid,
// obtained for every node at once with one FFT of the characteristic function,
// then interpolated. Used wherever a single parameter set is evaluated at many
// points (likelihoods over large samples, K-S tests, quantiles).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/polygamma.hpp>
#include <fftw3.h>

#include "levy/error.hpp"
#include "levy/stable.hpp"

namespace levy {

struct TableOptions {
  std::size_t fft_size = std::size_t{1} << 16;
  double spacing = 0.02;        // node spacing of the standardized density
  bool with_cdf = true;
  double splice_rel_tol = 0.01;
  double splice_abs_tol = 1e-8;
  double singular_order = 4.0;  // near-origin terms removed up to t^order
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// One in-place forward transform per thread; only planning touches FFTW's
// global state.
class FftWorkspace {
 public:
  explicit FftWorkspace(std::size_t n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    data_ = fftw_alloc_complex(n_);
    plan_ = fftw_plan_dft_1d(static_cast<int>(n_), data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
  ~FftWorkspace() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(data_);
  }

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] fftw_complex* data() { return data_; }
  void execute() { fftw_execute(plan_); }

  static FftWorkspace& for_size(std::size_t n) {
    thread_local std::vector<std::unique_ptr<FftWorkspace>> cache;
    for (auto& w : cache) {
      if (w->size() == n) return *w;
    }
    cache.push_back(std::make_unique<FftWorkspace>(n));
    return *cache.back();
  }

 private:
  std::size_t n_;
  fftw_complex* data_ = nullptr;
  fftw_plan plan_ = nullptr;
};

inline double cubic_lagrange(double fm1, double f0, double f1, double f2, double u) {
  // Nodes at -1, 0, 1, 2; u in [0, 1].
  const double um1 = u + 1.0;
  const double u1 = u - 1.0;
  const double u2 = u - 2.0;
  return -fm1 * u * u1 * u2 / 6.0 + f0 * um1 * u1 * u2 / 2.0 - f1 * um1 * u * u2 / 2.0 +
         f2 * um1 * u * u1 / 6.0;
}

}  // namespace detail

/// Standardized stable law (gamma = 1, S0 location 0) on a uniform grid.
class StandardStableTable {
 public:
  StandardStableTable(double alpha, double beta, const TableOptions& options = {})
      : law_(alpha, beta) {
    if (!(alpha > 0.0 && alpha <= 2.0) || !(beta >= -1.0 && beta <= 1.0)) {
      throw InvalidParameter("stable table: invalid (alpha, beta)");
    }
    build_density(options);
    if (options.with_cdf) build_cdf();
  }

  [[nodiscard]] double pdf(double z) const {
    if (z < lo_ || z > hi_) return law_.tail_pdf(z);
    const double pos = (z - lo_) / step_;
    auto i = static_cast<std::ptrdiff_t>(pos);
    const auto last = static_cast<std::ptrdiff_t>(pdf_.size()) - 1;
    i = std::clamp<std::ptrdiff_t>(i, 1, last - 2);
    const double u = pos - static_cast<double>(i);
    const double v = detail::cubic_lagrange(pdf_[i - 1], pdf_[i], pdf_[i + 1], pdf_[i + 2], u);
    return std::max(v, 0.0);
  }

  [[nodiscard]] double cdf(double z) const {
    if (cdf_.empty()) throw Error("stable table built without distribution function");
    if (z <= lo_) {
      if (left_mass_ <= 0.0) return 0.0;
      return left_mass_ * std::pow(z / lo_, -law_.alpha);
    }
    if (z >= hi_) {
      if (right_mass_ <= 0.0) return 1.0;
      return 1.0 - right_mass_ * std::pow(z / hi_, -law_.alpha);
    }
    const double pos = (z - lo_) / step_;
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cdf_.size()) i = cdf_.size() - 2;
    const double u = pos - static_cast<double>(i);
    // Cubic Hermite with the density as slope.
    const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
    const double h10 = u * (1.0 - u) * (1.0 - u);
    const double h01 = u * u * (3.0 - 2.0 * u);
    const double h11 = u * u * (u - 1.0);
    const double v = h00 * cdf_[i] + h10 * step_ * pdf_[i] + h01 * cdf_[i + 1] +
                     h11 * step_ * pdf_[i + 1];
    return std::clamp(v, cdf_[i], cdf_[i + 1]);
  }

  [[nodiscard]] double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("quantile: probability must be in (0, 1)");
    if (cdf_.empty()) throw Error("stable table built without distribution function");
    if (p <= cdf_.front()) {
      if (left_mass_ <= 0.0) return lo_;
      return lo_ * std::pow(p / left_mass_, -1.0 / law_.alpha);
    }
    if (p >= cdf_.back()) {
      if (right_mass_ <= 0.0) return hi_;
      return hi_ * std::pow((1.0 - p) / right_mass_, -1.0 / law_.alpha);
    }
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), p);
    const auto i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
    double a = lo_ + static_cast<double>(i) * step_;
    double b = a + step_;
    for (int iter = 0; iter < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++iter) {
      const double m = 0.5 * (a + b);
      (cdf(m) < p ? a : b) = m;
    }
    return 0.5 * (a + b);
  }

  [[nodiscard]] double lower_edge() const { return lo_; }
  [[nodiscard]] double upper_edge() const { return hi_; }
  [[nodiscard]] double alpha() const { return law_.alpha; }
  [[nodiscard]] const detail::StandardStable& law() const { return law_; }

 private:
  // The transform is taken in the coordinate w = z + shift, where the integrand
  // is G(t) = phi0(t) e^{i shift t}. Near t = 0, G has terms t^(k alpha + j)
  // (or t^k ln^k t for alpha = 1) that spoil the trapezoid rule; they are removed
  // through S(t) = e^{-t} sum_terms, whose transform is known in closed form, and
  // added back node by node.
  static constexpr double kSingularSupport = 60.0;  // e^-t t^order is negligible beyond

  struct SingularTerm {
    std::complex<double> raw;   // coefficient of the term in G(t) e^t
    std::complex<double> coef;  // raw * Gamma(s + 1)
    int k;                      // power of t^alpha (or of t ln t)
    int j;                      // extra power of t
    std::vector<double> dlog;   // polygamma(m, s + 1), m = 0..k-1 (alpha = 1 only)
  };

  [[nodiscard]] std::complex<double> g(double t) const {
    if (t <= 0.0) return {1.0, 0.0};
    if (law_.unit) {
      return std::polar(std::exp(-t), -law_.beta * (2.0 / std::numbers::pi) * t * std::log(t));
    }
    const double ta = std::pow(t, law_.alpha);
    return std::polar(std::exp(-ta), law_.skew * ta);
  }

  void build_terms(double order) {
    terms_.clear();
    const double a = law_.alpha;
    if (a == 2.0) return;  // e^{-t^2} needs no correction
    if (law_.unit) {
      const std::complex<double> b(0.0, -law_.beta * 2.0 / std::numbers::pi);
      std::complex<double> c = 1.0;
      for (int k = 0; k <= static_cast<int>(order); ++k) {
        if (k > 0) c *= b / static_cast<double>(k);
        if (k > 0 && law_.beta == 0.0) break;
        SingularTerm term{c, c * std::tgamma(k + 1.0), k, 0, {}};
        for (int m = 0; m < k; ++m) {
          term.dlog.push_back(boost::math::polygamma(m, k + 1.0));
        }
        terms_.push_back(std::move(term));
      }
      return;
    }
    const std::complex<double> minus_c(-1.0, law_.skew);
    std::complex<double> ck = 1.0;
    for (int k = 0; k * a <= order; ++k) {
      if (k > 0) ck *= minus_c / static_cast<double>(k);
      double jfact = 1.0;
      for (int j = 0; k * a + j <= order; ++j) {
        if (j > 0) jfact *= j;
        const double s = k * a + j;
        terms_.push_back({ck / jfact, ck / jfact * std::tgamma(s + 1.0), k, j, {}});
      }
    }
  }

  // S(t)
  [[nodiscard]] std::complex<double> singular_sum(double t) const {
    if (t > kSingularSupport) return 0.0;
    std::complex<double> sum = 0.0;
    const double tl = t > 0.0 ? t * std::log(t) : 0.0;
    for (const auto& term : terms_) {
      double mag = 1.0;
      if (law_.unit) {
        if (term.k > 0) mag = std::pow(tl, term.k);
      } else if (term.k > 0 || term.j > 0) {
        mag = std::pow(t, term.k * law_.alpha + term.j);
      }
      sum += term.raw * mag;
    }
    return std::exp(-t) * sum;
  }

  // integral_0^inf S(t) e^{-iwt} dt
  [[nodiscard]] std::complex<double> singular_transform(double w) const {
    const std::complex<double> a(1.0, w);
    const std::complex<double> inv = 1.0 / a;
    const std::complex<double> log_a = std::log(a);
    std::complex<double> sum = 0.0;
    if (law_.unit) {
      std::complex<double> pw = inv;
      std::vector<std::complex<double>> deriv;
      for (const auto& term : terms_) {
        // d^k/ds^k [Gamma(s+1) a^-(s+1)] / Gamma(s+1) via complete Bell polynomials
        std::vector<std::complex<double>> l(term.k + 1);
        for (int m = 1; m <= term.k; ++m) {
          l[m] = term.dlog[m - 1] - (m == 1 ? log_a : std::complex<double>(0.0));
        }
        std::vector<std::complex<double>> bell(term.k + 1);
        bell[0] = 1.0;
        for (int n = 0; n < term.k; ++n) {
          std::complex<double> acc = 0.0;
          double binom = 1.0;
          for (int i = 0; i <= n; ++i) {
            acc += binom * bell[n - i] * l[i + 1];
            binom = binom * (n - i) / (i + 1);
          }
          bell[n + 1] = acc;
        }
        sum += term.coef * pw * bell[term.k];
        pw *= inv;
      }
      return sum;
    }
    const std::complex<double> inv_alpha = std::exp(-law_.alpha * log_a);
    // Terms come ordered by k, then j = 0, 1, 2, ...
    std::complex<double> pk = inv;  // a^-(k alpha + 1)
    std::complex<double> pj = inv;  // a^-(k alpha + j + 1)
    int current_k = 0;
    for (const auto& term : terms_) {
      while (current_k < term.k) {
        pk *= inv_alpha;
        ++current_k;
      }
      pj = term.j == 0 ? pk : pj * inv;
      sum += term.coef * pj;
    }
    return sum;
  }

  void build_density(const TableOptions& opt) {
    const std::size_t n = opt.fft_size;
    const double spacing = std::min(opt.spacing, 2.0 * std::numbers::pi / law_.cutoff());
    const double dt = 2.0 * std::numbers::pi / (static_cast<double>(n) * spacing);
    const double period = static_cast<double>(n) * spacing;
    shift_ = law_.unit ? 0.0 : law_.skew;
    build_terms(opt.singular_order);

    auto& fft = detail::FftWorkspace::for_size(n);
    fftw_complex* data = fft.data();
    const double support = std::max(law_.cutoff(), kSingularSupport);
    const auto used = std::min<std::size_t>(n, static_cast<std::size_t>(support / dt) + 2);
    for (std::size_t j = 0; j < n; ++j) {
      if (j >= used) {
        data[j][0] = data[j][1] = 0.0;
        continue;
      }
      const double t = static_cast<double>(j) * dt;
      std::complex<double> v = g(t) - singular_sum(t);
      v *= (j == 0 ? 0.5 : 1.0) * dt * (j % 2 == 1 ? -1.0 : 1.0);
      data[j][0] = v.real();
      data[j][1] = v.imag();
    }
    fft.execute();

    const double w0 = -0.5 * period;
    auto index_of = [&](double z) {
      return static_cast<std::size_t>(std::llround((z + shift_ - w0) / spacing));
    };
    auto node = [&](std::size_t k) {
      const double w = w0 + static_cast<double>(k) * spacing;
      return (data[k][0] + singular_transform(w).real()) / std::numbers::pi;
    };
    const double reach = 0.25 * period;
    auto eval = [&](double z) { return node(index_of(z)); };
    const double right = splice(true, reach - shift_, opt, eval);
    const double left = splice(false, reach + shift_, opt, eval);
    const std::size_t k_lo = index_of(-left);
    const std::size_t k_hi = index_of(right);
    step_ = spacing;
    lo_ = w0 + static_cast<double>(k_lo) * spacing - shift_;
    hi_ = w0 + static_cast<double>(k_hi) * spacing - shift_;
    pdf_.resize(k_hi - k_lo + 1);
    for (std::size_t k = k_lo; k <= k_hi; ++k) pdf_[k - k_lo] = std::max(0.0, node(k));
  }

  template <class Eval>
  double splice(bool right, double reach, const TableOptions& opt, Eval&& eval) const {
    const double sign = right ? 1.0 : -1.0;
    if (law_.tail_weight(right) <= 1e-12) {
      // No power tail on this side: stop where the density has vanished.
      for (double z = 1.0; z < reach; z += 0.5) {
        if (std::abs(eval(sign * z)) < 1e-16 && std::abs(eval(sign * (z + 0.5))) < 1e-16) return z;
      }
      return reach;
    }
    bool previous_ok = false;
    double previous_z = 0.0;
    for (double z = 4.0; z <= reach; z *= 1.1) {
      const double q = eval(sign * z);
      const double a = law_.tail_pdf(sign * z);
      const double diff = std::abs(q - a);
      const bool ok = diff <= opt.splice_rel_tol * a && diff <= opt.splice_abs_tol;
      if (ok && previous_ok) return previous_z;
      previous_ok = ok;
      previous_z = z;
    }
    return reach;
  }

  void build_cdf() {
    const std::size_t m = pdf_.size();
    cdf_.assign(m, 0.0);
    double start = 0.0;
    try {
      start = std::clamp(detail::invert_cdf(law_, lo_), 0.0, 1.0);
    } catch (const QuadratureError&) {
      start = law_.tail_survival(lo_);
    }
    cdf_[0] = start;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      double inc;
      if (i >= 1 && i + 2 < m) {
        inc = step_ / 24.0 * (-pdf_[i - 1] + 13.0 * pdf_[i] + 13.0 * pdf_[i + 1] - pdf_[i + 2]);
      } else {
        inc = 0.5 * step_ * (pdf_[i] + pdf_[i + 1]);
      }
      cdf_[i + 1] = std::min(1.0, cdf_[i] + std::max(inc, 0.0));
    }
    left_mass_ = law_.tail_weight(false) > 0.0 ? cdf_.front() : 0.0;
    right_mass_ = law_.tail_weight(true) > 0.0 ? 1.0 - cdf_.back() : 0.0;
  }

  detail::StandardStable law_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double step_ = 0.0;
  double shift_ = 0.0;
  double left_mass_ = 0.0;
  double right_mass_ = 0.0;
  std::vector<double> pdf_;
  std::vector<double> cdf_;
  std::vector<SingularTerm> terms_;
};

/// A stable law with its standardized table, evaluated in data units.
class TabulatedStable {
 public:
  explicit TabulatedStable(const StableParams& p, const TableOptions& options = {})
      : params_((p.validate(), p)),
        table_(p.alpha, p.beta, options),
        loc0_(detail::s0_location(p)) {}

  [[nodiscard]] const StableParams& params() const { return params_; }
  [[nodiscard]] const StandardStableTable& table() const { return table_; }

  [[nodiscard]] double pdf(double x) const {
    return table_.pdf((x - loc0_) / params_.gamma) / params_.gamma;
  }

  [[nodiscard]] double log_pdf(double x) const {
    return std::log(std::max(pdf(x), std::numeric_limits<double>::min()));
  }

  [[nodiscard]] double cdf(double x) const { return table_.cdf((x - loc0_) / params_.gamma); }

  [[nodiscard]] double quantile(double p) const {
    return loc0_ + params_.gamma * table_.quantile(p);
  }

  /// Sum of log densities in input order.
  [[nodiscard]] double log_likelihood(std::span<const double> xs) const {
    double total = 0.0;
    for (double x : xs) total += log_pdf(x);
    return total;
  }

 private:
  StableParams params_;
  StandardStableTable table_;
  double loc0_;
};

}  // namespace levy
