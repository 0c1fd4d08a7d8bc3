#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "levy/estimation.hpp"
#include "levy/stable.hpp"
#include "levy/stable_table.hpp"

using namespace levy;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = a + (b - a) * i / (n - 1);
  return xs;
}

StableParams random_params(Rng& rng) {
  StableParams p;
  do {
    p.alpha = rng.uniform(0.3, 2.0);
  } while (uses_unit_branch(p.alpha));
  p.beta = rng.uniform(-1.0, 1.0);
  p.gamma = rng.uniform(0.1, 5.0);
  p.delta = rng.uniform(-3.0, 3.0);
  return p;
}

}  // namespace

TEST(CharFn, GaussianAndCauchy) {
  EXPECT_NEAR(std::real(char_fn({2, 0, 1, 0}, 1.0)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(std::imag(char_fn({2, 0, 1, 0}, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::real(char_fn({1, 0, 1, 0}, 2.0)), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(std::real(char_fn({2, 0.7, 1.5, 0}, 0.8)), std::exp(-1.5 * 1.5 * 0.64), 1e-15);
}

TEST(CharFn, NormalizedAtZero) {
  const auto v = char_fn({1.2565, -0.0024, 0.3796, 0.0014}, 0.0);
  EXPECT_EQ(v, std::complex<double>(1.0, 0.0));
}

TEST(CharFn, RandomizedProperties) {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const StableParams p = random_params(rng);
    EXPECT_EQ(char_fn(p, 0.0), std::complex<double>(1.0, 0.0));
    const double t = rng.uniform(-20.0, 20.0);
    const auto v = char_fn(p, t);
    const double modulus = std::exp(-std::pow(p.gamma * std::abs(t), p.alpha));
    EXPECT_NEAR(std::abs(v), modulus, 1e-12 * std::max(1.0, modulus));
    EXPECT_LE(std::abs(v), 1.0 + 1e-15);
    const auto w = char_fn(p, -t);
    EXPECT_NEAR(w.real(), v.real(), 1e-12);
    EXPECT_NEAR(w.imag(), -v.imag(), 1e-12);
  }
}

TEST(CharFn, UnitBranchModulus) {
  const StableParams p{1.004, 0.6, 2.0, 0.3};
  EXPECT_NEAR(std::abs(char_fn(p, 1.7)), std::exp(-2.0 * 1.7), 1e-14);
}

TEST(CharFn, RejectsInvalidParameters) {
  EXPECT_THROW((void)char_fn({0.0, 0, 1, 0}, 1.0), InvalidParameter);
  EXPECT_THROW((void)char_fn({2.1, 0, 1, 0}, 1.0), InvalidParameter);
  EXPECT_THROW((void)char_fn({1.5, 1.2, 1, 0}, 1.0), InvalidParameter);
  EXPECT_THROW((void)char_fn({1.5, 0, 0, 0}, 1.0), InvalidParameter);
  EXPECT_THROW((void)char_fn({1.5, 0, 1, NAN}, 1.0), InvalidParameter);
  EXPECT_THROW((void)char_fn({1.5, 0, 1, 0}, INFINITY), InvalidParameter);
}

TEST(Pdf, ClosedForms) {
  EXPECT_NEAR(density({2, 0, 1, 0}, 0.0), 1.0 / (2.0 * std::sqrt(kPi)), 1e-10);
  EXPECT_NEAR(density({1, 0, 1, 0}, 0.0), 1.0 / kPi, 1e-10);
  const auto xs = linspace(-10, 10, 201);
  const auto g = pdf({2, 0, 1.3, 0.4}, xs);
  const auto c = pdf({1, 0, 0.7, -0.2}, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double u = xs[i] - 0.4;
    EXPECT_NEAR(g.pdf_values[i], std::exp(-u * u / (4 * 1.69)) / (2 * 1.3 * std::sqrt(kPi)), 1e-9);
    const double v = (xs[i] + 0.2) / 0.7;
    EXPECT_NEAR(c.pdf_values[i], 1.0 / (kPi * 0.7 * (1 + v * v)), 1e-9);
  }
}

TEST(Pdf, MatchesQuadratureOracleAtAlpha15) {
  // Independent 30-digit quadrature of the inversion integral.
  EXPECT_NEAR(density({1.5, 0, 1, 0}, 0.0), 0.287352751452164445, 1e-9);
}

TEST(Pdf, GridInvariants) {
  const auto xs = linspace(-30, 30, 301);
  const auto g = pdf({1.3, 0.4, 1.0, 0.5}, xs);
  ASSERT_EQ(g.pdf_values.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_GE(g.pdf_values[i], 0.0);
    if (i > 0) EXPECT_GE(g.cdf_values[i], g.cdf_values[i - 1]);
  }
  EXPECT_GE(g.cdf_values.front(), 0.0);
  EXPECT_LE(g.cdf_values.back(), 1.0);
}

TEST(Pdf, RejectsUnorderedAbscissae) {
  const std::vector<double> xs{0.0, 1.0, 1.0};
  EXPECT_THROW((void)pdf({1.5, 0, 1, 0}, xs), InvalidParameter);
}

TEST(Pdf, QuadratureBudgetIsEnforced) {
  DensityOptions tight;
  tight.max_panels = 1;
  EXPECT_THROW((void)density({1.5, 0, 1, 0}, 0.3, tight), QuadratureError);
}

TEST(Pdf, IntegratesToOneOnCentralQuantileRange) {
  for (double alpha : {1.2, 1.5, 1.9}) {
    const StableParams p{alpha, 0.3, 1.0, 0.0};
    const TabulatedStable table(p);
    const auto xs = linspace(table.quantile(1e-4), table.quantile(1 - 1e-4), 2001);
    const auto g = pdf(p, xs);
    EXPECT_NEAR(g.trapezoid_mass(), 1.0, 1e-3) << "alpha=" << alpha;
  }
}

TEST(Pdf, SkewnessVanishesAtAlphaTwo) {
  const auto xs = linspace(-6, 6, 61);
  const auto ref = pdf({2, 0, 1, 0}, xs);
  for (double b : {-1.0, -0.3, 0.5, 1.0}) {
    const auto g = pdf({2, b, 1, 0}, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(g.pdf_values[i], ref.pdf_values[i], 1e-8);
  }
}

TEST(Cdf, ClosedForms) {
  EXPECT_NEAR(cdf({2, 0, 1, 0}, 0.0), 0.5, 1e-10);
  EXPECT_NEAR(cdf({1, 0, 1, 0}, 1.0), 0.75, 1e-9);
  EXPECT_EQ(cdf({1.5, 0, 1, 0}, INFINITY), 1.0);
  EXPECT_EQ(cdf({1.5, 0, 1, 0}, -INFINITY), 0.0);
}

TEST(Cdf, MatchesQuadratureOracle) {
  // 30-digit Gil-Pelaez quadrature.
  EXPECT_NEAR(cdf({1.7, 0.1, 1, 0}, 2.0), 0.906812091210030046, 1e-8);
}

TEST(Cdf, MonotoneOnRandomPairs) {
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    StableParams p{rng.uniform(1.1, 2.0), rng.uniform(-1, 1), rng.uniform(0.5, 2), 0};
    if (uses_unit_branch(p.alpha)) continue;
    double x1 = rng.uniform(-20, 20);
    double x2 = rng.uniform(-20, 20);
    if (x1 > x2) std::swap(x1, x2);
    EXPECT_LE(cdf(p, x1), cdf(p, x2) + 1e-12);
  }
}

TEST(TailDensity, PowerLawRatios) {
  const StableParams p{1.5, 0, 1, 0};
  EXPECT_NEAR(tail_density(p, 20.0) / tail_density(p, 40.0), std::pow(2.0, 2.5), 1e-12);
  EXPECT_NEAR(tail_density(p, 40.0) / tail_density(p, 20.0), 0.176776695296637, 1e-12);
  const StableParams c{1, 0, 1, 0};
  EXPECT_NEAR(tail_density(c, 100.0) / tail_density(c, 10.0), 1e-2, 1e-14);
  EXPECT_THROW((void)tail_density({2, 0, 1, 0}, 10.0), DomainError);
}

TEST(TailDensity, AgreesWithInversionFarOut) {
  const StableParams p{1.5, 0, 1, 0};
  // Oracle densities from high-precision oscillatory quadrature.
  EXPECT_NEAR(density(p, 50.0), 1.70793647535e-5, 2e-8);
  EXPECT_NEAR(density(p, 100.0), 3.00163603479e-6, 1e-8);
  const double r50 = density(p, 50.0) / tail_density(p, 50.0);
  const double r100 = density(p, 100.0) / tail_density(p, 100.0);
  EXPECT_NEAR(r50 / r100, 1.0, 0.1);
}

TEST(Sample, DeterministicPerSeed) {
  const StableParams p{1.3, 0.2, 1.5, -0.4};
  EXPECT_EQ(sample(p, 1000, 99), sample(p, 1000, 99));
  EXPECT_NE(sample(p, 1000, 99), sample(p, 1000, 100));
  EXPECT_THROW((void)sample(p, 0, 1), InvalidParameter);
}

TEST(Sample, GaussianKurtosis) {
  const auto xs = sample({2, 0, 1, 0}, 1'000'000, 2024);
  EXPECT_NEAR(excess_kurtosis(xs), 0.0, 0.02);
  const auto s = series_stats(xs);
  EXPECT_NEAR(s.variance, 2.0, 0.01);
}

TEST(Sample, UnitBranchMatchesCauchyQuartiles) {
  auto xs = sample({1, 0, 2, 1}, 200'000, 3);
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(xs[xs.size() / 4], -1.0, 0.05);
  EXPECT_NEAR(xs[3 * xs.size() / 4], 3.0, 0.05);
}

TEST(Sample, RoundTripThroughFit) {
  const StableParams p{1.5, 0, 1, 0};
  const auto fitted = fit_stable(sample(p, 100'000, 7));
  EXPECT_NEAR(fitted.alpha, 1.5, 0.05);
}

TEST(Sample, SkewedDrawsFollowTheCdf) {
  for (const StableParams& p : {StableParams{1.3, 0.7, 2.0, 1.0}, StableParams{0.8, -0.5, 1, 0},
                                StableParams{1.0, 0.5, 1.5, -1}}) {
    const auto xs = sample(p, 20'000, 17);
    const auto ks = ks_test(xs, p);
    EXPECT_GT(ks.p_value, 0.001) << p.alpha << " " << p.beta;
  }
}

TEST(Sample, StableUnderConvolution) {
  for (double alpha : {1.3, 1.7}) {
    const StableParams p{alpha, 0, 1, 0};
    const TabulatedStable law(p);
    const int n = 10;
    const double scale = std::pow(static_cast<double>(n), 1.0 / alpha);
    int accepted = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto xs = sample(p, 2000 * n, derive_seed(31, static_cast<std::uint64_t>(trial)));
      std::vector<double> sums(2000);
      for (int j = 0; j < 2000; ++j) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += xs[j * n + i];
        sums[j] = s / scale;
      }
      if (!ks_test(sums, [&](double x) { return law.cdf(x); }).reject) ++accepted;
    }
    EXPECT_GE(accepted, 90) << "alpha=" << alpha;

    const auto xs = sample(p, 20'000 * n, 77);
    std::vector<double> sums(20'000);
    for (int j = 0; j < 20'000; ++j) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += xs[j * n + i];
      sums[j] = s / scale;
    }
    EXPECT_NEAR(fit_stable(sums).alpha, alpha, 0.05);
  }
}

TEST(Sample, TailExponent) {
  auto xs = sample({1.5, 0, 1, 0}, 1'000'000, 8);
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = static_cast<std::size_t>(0.99 * n); i < static_cast<std::size_t>(0.999 * n); ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log((n - static_cast<double>(i)) / n);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  EXPECT_NEAR(slope, -1.5, 0.15);
}
