#pragma once

// Fourier inversion of characteristic functions of real random variables by
// panel-wise adaptive Gauss-Kronrod quadrature of the real (cosine) form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levy/error.hpp"

namespace levy::detail {

struct InversionOptions {
  double abs_tol = 1e-8;           // on the returned density / probability
  double panel_abs_tol = 1e-14;    // absolute target per panel, before the 1/pi factor
  unsigned max_depth = 12;
  std::size_t max_panels = 200000;
};

// Compensated running sum; panel contributions alternate in sign far out in
// the tail and plain accumulation loses the digits the splice test relies on.
class NeumaierSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct CfSample {
  double modulus;
  double phase;
};

// A characteristic function restricted to t >= 0. `Cf` must provide
//   CfSample at(double t) const;      // |phi(t)| and arg phi(t)
//   double cutoff() const;            // |phi| negligible beyond
//   double phase_rate() const;        // bound on |d arg phi / dt| over [0, cutoff]
template <class Cf>
std::size_t panel_count(const Cf& cf, double z, double& width) {
  const double omega = std::max(1.0, std::abs(z) + cf.phase_rate());
  width = std::numbers::pi / omega;
  return static_cast<std::size_t>(std::ceil(cf.cutoff() / width));
}

template <class Cf>
bool inversion_feasible(const Cf& cf, double z, const InversionOptions& opt) {
  double width = 0.0;
  return panel_count(cf, z, width) <= opt.max_panels;
}

template <class Cf, class Integrand>
double integrate_panels(const Cf& cf, double z, const InversionOptions& opt, Integrand&& f,
                        const char* what) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
  double width = 0.0;
  const std::size_t panels = panel_count(cf, z, width);
  if (panels > opt.max_panels) {
    throw QuadratureError(std::string(what) + ": oscillatory integral needs " +
                              std::to_string(panels) + " panels (budget " +
                              std::to_string(opt.max_panels) + ")",
                          std::numeric_limits<double>::infinity());
  }
  const double upper = cf.cutoff();
  NeumaierSum total;
  double err_total = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) * width;
    const double b = std::min(upper, a + width);
    if (b <= a) break;
    double err = 0.0;
    double l1 = 0.0;
    if (k == 0) {
      // |phi| behaves like 1 - t^alpha at the origin; the endpoint singularity
      // needs the double-exponential rule.
      thread_local boost::math::quadrature::tanh_sinh<double> endpoint_rule;
      total.add(endpoint_rule.integrate(f, a, b, 1e-12, &err, &l1));
    } else {
      double v = Rule::integrate(f, a, b, 0, 0.0, &err, &l1);
      if (err > opt.panel_abs_tol && l1 > 0.0) {
        v = Rule::integrate(f, a, b, opt.max_depth, opt.panel_abs_tol / l1, &err, &l1);
      }
      total.add(v);
    }
    err_total += err;
  }
  const double value = total.value() / std::numbers::pi;
  err_total /= std::numbers::pi;
  if (!(err_total <= opt.abs_tol) || !std::isfinite(value)) {
    throw QuadratureError(std::string(what) + ": estimated error " + std::to_string(err_total) +
                              " exceeds tolerance " + std::to_string(opt.abs_tol) +
                              " at z=" + std::to_string(z),
                          err_total);
  }
  return value;
}

/// f(z) = (1/pi) * integral_0^inf |phi(t)| cos(arg phi(t) - z t) dt
template <class Cf>
double invert_density(const Cf& cf, double z, const InversionOptions& opt = {}) {
  auto f = [&](double t) {
    const CfSample s = cf.at(t);
    return s.modulus * std::cos(s.phase - z * t);
  };
  return integrate_panels(cf, z, opt, f, "density inversion");
}

/// Gil-Pelaez: F(z) = 1/2 - (1/pi) * integral_0^inf Im[phi(t) e^{-izt}] / t dt
template <class Cf>
double invert_cdf(const Cf& cf, double z, const InversionOptions& opt = {}) {
  auto f = [&](double t) {
    const CfSample s = cf.at(t);
    return s.modulus * std::sin(s.phase - z * t) / t;
  };
  return 0.5 - integrate_panels(cf, z, opt, f, "distribution inversion");
}

}  // namespace levy::detail
