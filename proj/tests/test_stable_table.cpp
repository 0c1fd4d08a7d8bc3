#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "levy/stable.hpp"
#include "levy/stable_table.hpp"

using namespace levy;

namespace {

struct Case {
  double alpha;
  double beta;
};

class TableVsInversion : public ::testing::TestWithParam<Case> {};

}  // namespace

TEST_P(TableVsInversion, PdfAndCdfAgree) {
  const auto [alpha, beta] = GetParam();
  const StableParams p{alpha, beta, 1.0, 0.0};
  const TabulatedStable table(p);
  std::vector<double> xs;
  for (int i = 0; i <= 80; ++i) xs.push_back(-20.0 + 0.5 * i);
  const auto exact = pdf(p, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_NEAR(table.pdf(xs[i]), exact.pdf_values[i], 1e-6) << "x=" << xs[i];
    EXPECT_NEAR(table.cdf(xs[i]), exact.cdf_values[i], 1e-6) << "x=" << xs[i];
  }
}

INSTANTIATE_TEST_SUITE_P(Grid, TableVsInversion,
                         ::testing::Values(Case{0.6, 0.0}, Case{0.9, 0.5}, Case{1.0, 0.3},
                                           Case{1.2, 0.5}, Case{1.5, -0.8}, Case{1.8, 1.0},
                                           Case{2.0, 0.0}));

TEST(Table, QuantileInvertsCdf) {
  const TabulatedStable t({1.4, 0.3, 2.0, 1.0});
  for (double q : {1e-4, 0.01, 0.25, 0.5, 0.75, 0.99, 0.9999}) {
    EXPECT_NEAR(t.cdf(t.quantile(q)), q, 1e-8);
  }
  EXPECT_THROW((void)t.quantile(0.0), InvalidParameter);
  EXPECT_THROW((void)t.quantile(1.0), InvalidParameter);
}

TEST(Table, ScalesWithGammaAndDelta) {
  const TabulatedStable unit({1.6, 0.2, 1.0, 0.0});
  const TabulatedStable scaled({1.6, 0.2, 3.0, -2.0});
  for (double z : {-4.0, -1.0, 0.0, 0.7, 5.0}) {
    EXPECT_NEAR(scaled.pdf(-2.0 + 3.0 * z), unit.pdf(z) / 3.0, 1e-12);
  }
}

TEST(Table, TailsFollowThePowerLaw) {
  const StableParams p{1.5, 0, 1, 0};
  const TabulatedStable t(p);
  EXPECT_NEAR(t.pdf(1e3) / tail_density(p, 1e3), 1.0, 1e-3);
  EXPECT_NEAR(t.pdf(-1e4) / tail_density(p, 1e4), 1.0, 1e-3);
  EXPECT_GT(t.cdf(-1e4), 0.0);
  EXPECT_LT(t.cdf(1e4), 1.0);
}

TEST(Table, LogLikelihoodIsSumOfLogs) {
  const TabulatedStable t({1.3, -0.4, 0.8, 0.1});
  const std::vector<double> xs{-3.0, -0.2, 0.0, 0.4, 12.0};
  double sum = 0.0;
  for (double x : xs) sum += std::log(t.pdf(x));
  EXPECT_NEAR(t.log_likelihood(xs), sum, 1e-12);
}

TEST(Table, DeterministicAcrossBuilds) {
  const TabulatedStable a({1.7, 0.6, 1.0, 0.0});
  const TabulatedStable b({1.7, 0.6, 1.0, 0.0});
  for (double x : {-10.0, -1.0, 0.0, 2.5, 30.0}) {
    EXPECT_EQ(a.pdf(x), b.pdf(x));
    EXPECT_EQ(a.cdf(x), b.cdf(x));
  }
}
