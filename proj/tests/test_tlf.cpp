#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "levy/estimation.hpp"
#include "levy/tlf.hpp"

using namespace levy;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(HardTruncate, KeepsOrderAndThreshold) {
  const std::vector<double> xs{0.1, -100.0, 0.5, 2.0, -0.3, 100.0, 1.0};
  const double sd = population_sd(xs);
  const auto kept = hard_truncate(xs, 1.0);
  std::vector<double> expect;
  for (double x : xs) {
    if (std::abs(x) <= sd) expect.push_back(x);
  }
  EXPECT_EQ(kept, expect);
  EXPECT_EQ(kept, (std::vector<double>{0.1, 0.5, 2.0, -0.3, 1.0}));
}

TEST(HardTruncate, InfiniteCutoffIsIdentity) {
  const auto xs = sample({1.4, 0, 1, 0}, 5000, 3);
  EXPECT_EQ(hard_truncate(xs, kInf), xs);
}

TEST(HardTruncate, Errors) {
  EXPECT_THROW((void)hard_truncate(std::vector<double>{}, 2.0), InvalidParameter);
  EXPECT_THROW((void)hard_truncate(std::vector<double>{1.0, 2.0}, 0.0), InvalidParameter);
  // Every |x| exceeds 0.1 sd.
  EXPECT_THROW((void)hard_truncate(std::vector<double>{-1.0, 1.0}, 0.1), EmptyResult);
}

TEST(HardTruncate, KurtosisFiniteAfterTruncation) {
  const auto xs = sample({1.4, 0, 1, 0}, 1'000'000, 12);
  const auto kept = hard_truncate(xs, 10.0);
  const double k = excess_kurtosis(kept);
  EXPECT_TRUE(std::isfinite(k));
  EXPECT_GT(k, 0.0);
}

TEST(HardTlf, NormalizationMatchesOracle) {
  // Mass of the alpha = 1.4 law inside +-10, from high-precision quadrature.
  const auto p = make_hard_tlf({1.4, 0, 1, 0}, 10.0);
  EXPECT_NEAR(1.0 / p.norm_c, 0.980989971466414, 1e-8);
  EXPECT_EQ(make_hard_tlf({1.4, 0, 1, 0}, kInf).norm_c, 1.0);
  EXPECT_THROW((void)make_hard_tlf({1.4, 0.5, 1, 0}, 10.0), InvalidParameter);
}

TEST(HardTlf, SampleVarianceMatchesOracle) {
  const auto p = make_hard_tlf({1.4, 0, 1, 0}, 10.0);
  const auto xs = sample_hard_tlf(p, 400'000, 21);
  for (double x : xs) ASSERT_LE(std::abs(x), 10.0);
  EXPECT_NEAR(series_stats(xs).variance, 4.037488612271707, 0.05);
}

TEST(HardTlf, PdfIntegratesToOne) {
  const auto p = make_hard_tlf({1.4, 0, 1, 0}, 10.0);
  std::vector<double> xs;
  for (int i = 0; i <= 2000; ++i) xs.push_back(-10.0 + 0.01 * i);
  const auto g = hard_tlf_pdf(p, xs);
  EXPECT_NEAR(g.trapezoid_mass(), 1.0, 1e-4);
  EXPECT_NEAR(g.cdf_values.back(), 1.0, 1e-8);
  const std::vector<double> outside{-11.0, 11.0};
  const auto h = hard_tlf_pdf(p, outside);
  EXPECT_EQ(h.pdf_values[0], 0.0);
  EXPECT_EQ(h.pdf_values[1], 0.0);
}

TEST(HardTlf, RejectionBudget) {
  HardTLFParams p;
  p.base = {1.4, 0, 1, 0};
  p.cutoff_l = 1e-9;
  p.norm_c = 1e8;
  EXPECT_THROW((void)sample_hard_tlf(p, 10, 1), RejectionBudgetExceeded);
}

TEST(HardTlf, ConvergesToGaussianUnderAggregation) {
  const auto p = make_hard_tlf({1.4, 0, 1, 0}, 10.0);
  ReturnSeries s;
  s.returns = sample_hard_tlf(p, 1'000'000, 4);
  const double k1 = excess_kurtosis(s.returns);
  const double k1000 = excess_kurtosis(convolve_returns(s, 1000).returns);
  EXPECT_LT(std::abs(k1000), 0.05 * k1 + 0.3);
}

TEST(Koponen, LogCharFnOracle) {
  const KoponenParams p{1.0, 1.5, 0.5};
  EXPECT_NEAR(koponen_log_char_fn(p, 2.0).real(), -2.198999545155185928, 1e-12);
  EXPECT_EQ(koponen_log_char_fn(p, 0.0).real(), 0.0);
  EXPECT_EQ(koponen_log_char_fn(p, 2.0).imag(), 0.0);
}

TEST(Koponen, ReducesToStableWithoutCutoff) {
  // lambda = 0: log phi = -(c|t|)^a / cos(pi a / 2) * cos(pi a / 2) = -(c|t|)^a.
  const KoponenParams p{1.3, 1.5, 0.0};
  for (double t : {0.3, 1.0, 4.0}) {
    EXPECT_NEAR(koponen_log_char_fn(p, t).real(), -std::pow(1.3 * t, 1.5), 1e-12);
  }
}

TEST(Koponen, VarianceOracleAndCurvature) {
  const KoponenParams p{1.0, 1.5, 0.2};
  EXPECT_NEAR(koponen_variance(p), 2.371708245126284433, 1e-12);
  const double h = 1e-3;
  const double curv = (koponen_log_char_fn(p, h).real() * 2.0) / (h * h);
  EXPECT_NEAR(-curv, koponen_variance(p), 1e-3);
  EXPECT_TRUE(std::isinf(koponen_variance({1.0, 1.5, 0.0})));
}

TEST(Koponen, PdfIsADensity) {
  const KoponenParams p{1.0, 1.5, 0.3};
  std::vector<double> xs;
  for (int i = 0; i <= 1200; ++i) xs.push_back(-30.0 + 0.05 * i);
  const auto g = koponen_pdf(p, xs);
  EXPECT_NEAR(g.trapezoid_mass(), 1.0, 2e-3);
  for (std::size_t i = 1; i < xs.size(); ++i) EXPECT_GE(g.cdf_values[i], g.cdf_values[i - 1]);
  double m2 = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double a = xs[i - 1] * xs[i - 1] * g.pdf_values[i - 1];
    const double b = xs[i] * xs[i] * g.pdf_values[i];
    m2 += 0.5 * (a + b) * (xs[i] - xs[i - 1]);
  }
  EXPECT_NEAR(m2, koponen_variance(p), 0.05 * koponen_variance(p));
}

TEST(Koponen, Validation) {
  EXPECT_THROW((void)koponen_log_char_fn({1.0, 1.0, 0.5}, 1.0), InvalidParameter);
  EXPECT_THROW((void)koponen_log_char_fn({1.0, 2.0, 0.5}, 1.0), InvalidParameter);
  EXPECT_THROW((void)koponen_log_char_fn({-1.0, 1.5, 0.5}, 1.0), InvalidParameter);
  EXPECT_THROW((void)koponen_log_char_fn({1.0, 1.5, -0.5}, 1.0), InvalidParameter);
}

TEST(HardTruncate, SurvivingFractionMatchesTailMass) {
  const StableParams base{1.4, 0, 1, 0};
  const auto xs = sample(base, 1'000'000, 31);
  const double threshold = 10.0 * population_sd(xs);
  const auto kept = hard_truncate(xs, 10.0);
  const double fraction = static_cast<double>(kept.size()) / static_cast<double>(xs.size());
  const double mass = cdf(base, threshold) - cdf(base, -threshold);
  const double mc_sd = std::sqrt(mass * (1.0 - mass) / static_cast<double>(xs.size()));
  EXPECT_NEAR(fraction, mass, 4.0 * mc_sd + 1e-6);
}
