#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "otrsens/numerics.hpp"
#include "otrsens/regression.hpp"
#include "otrsens/rng.hpp"

using namespace otrsens;

namespace {

DesignMatrix random_design(std::size_t n, Rng& rng) {
  DesignMatrix d(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    d(i, 0) = 1.0;
    d(i, 1) = rng.uniform(-1, 1);
    d(i, 2) = rng.normal();
  }
  return d;
}

}  // namespace

TEST(DesignRow, PrependsInterceptAndHonoursMask) {
  const std::vector<double> x{4.0, 5.0, 6.0};
  const std::vector<std::size_t> mask{2, 0};
  EXPECT_EQ(design_row(x, mask), (std::vector<double>{1.0, 6.0, 4.0}));
  EXPECT_EQ(design_row(x, std::vector<std::size_t>{}), (std::vector<double>{1.0}));
  EXPECT_THROW(design_row(x, std::vector<std::size_t>{3}), std::invalid_argument);
}

TEST(FitLogistic, InterceptOnlyIsLogitOfMean) {
  DesignMatrix d(10, 1);
  std::vector<double> y(10, 0.0);
  for (std::size_t i = 0; i < 10; ++i) d(i, 0) = 1.0;
  y[0] = y[3] = y[4] = 1.0;
  const auto fit = fit_logistic(d, y);
  EXPECT_NEAR(fit.coef[0], std::log(0.3 / 0.7), 1e-10);
}

TEST(FitLogistic, SolvesTheScoreEquationsAndRecoversTruth) {
  Rng rng(31, 0, Stream::kTest);
  const std::size_t n = 20000;
  const DesignMatrix d = random_design(n, rng);
  const std::vector<double> beta{0.3, -1.2, 0.8};
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = rng.uniform() < expit(dot(beta, d.row(i))) ? 1.0 : 0.0;
  const auto fit = fit_logistic(d, y);
  EXPECT_LT(fit.max_abs_score, 1e-8);
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d(i, j) * (y[i] - expit(dot(fit.coef, d.row(i))));
    EXPECT_NEAR(s, 0.0, 1e-7);
    EXPECT_NEAR(fit.coef[j], beta[j], 0.08);
  }
}

TEST(FitLogistic, ThrowsOnPerfectSeparation) {
  DesignMatrix d(20, 2);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    d(i, 0) = 1.0;
    d(i, 1) = static_cast<double>(i) - 9.5;
    y[i] = i >= 10 ? 1.0 : 0.0;
  }
  EXPECT_THROW(fit_logistic(d, y), NumericalError);
}

TEST(FitMultinomial, InterceptOnlyMatchesLogRatiosOfCounts) {
  DesignMatrix d(12, 1);
  for (std::size_t i = 0; i < 12; ++i) d(i, 0) = 1.0;
  const std::vector<std::size_t> labels{0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 0};
  const auto fit = fit_multinomial(d, labels, 3, 1, 1e-6);
  EXPECT_EQ(fit.coef[1][0], 0.0);
  EXPECT_NEAR(fit.coef[0][0], std::log(3.0 / 6.0), 1e-10);
  EXPECT_NEAR(fit.coef[2][0], std::log(3.0 / 6.0), 1e-10);
  const auto p = multinomial_probs(fit, std::vector<double>{1.0});
  EXPECT_NEAR(p[0], 0.25, 1e-10);
  EXPECT_NEAR(p[1], 0.5, 1e-10);
  EXPECT_NEAR(p[2] + p[0] + p[1], 1.0, 1e-15);
}

TEST(FitMultinomial, AbsentCategoryGetsTheFloor) {
  DesignMatrix d(6, 1);
  for (std::size_t i = 0; i < 6; ++i) d(i, 0) = 1.0;
  const std::vector<std::size_t> labels{1, 1, 1, 2, 2, 2};
  const auto fit = fit_multinomial(d, labels, 3, 1, 1e-6);
  EXPECT_NEAR(fit.coef[0][0], std::log(1e-6), 1e-12);
  const auto p = multinomial_probs(fit, std::vector<double>{1.0});
  EXPECT_NEAR(p[0], 1e-6 / (2.0 + 1e-6), 1e-12);
  EXPECT_THROW(fit_multinomial(d, labels, 3, 0, 1e-6), std::invalid_argument);
}

TEST(FitMultinomial, ScoreEquationsHoldWithCovariates) {
  Rng rng(32, 0, Stream::kTest);
  const std::size_t n = 3000;
  const DesignMatrix d = random_design(n, rng);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::array<double, 3> w{std::exp(0.5 * d(i, 1)), 1.0, std::exp(-0.3 + d(i, 2))};
    labels[i] = rng.categorical(w);
  }
  const auto fit = fit_multinomial(d, labels, 3, 1, 1e-6);
  for (std::size_t k : {0u, 2u}) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto p = multinomial_probs(fit, d.row(i));
        s += d(i, j) * ((labels[i] == k ? 1.0 : 0.0) - p[k]);
      }
      EXPECT_NEAR(s, 0.0, 1e-6) << k << " " << j;
    }
  }
}

TEST(FitOls, MatchesClosedFormSimpleRegression) {
  Rng rng(33, 0, Stream::kTest);
  const std::size_t n = 50;
  DesignMatrix d(n, 2);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = 2.0 - 0.7 * x[i] + rng.normal(0.0, 0.3);
    d(i, 0) = 1.0;
    d(i, 1) = x[i];
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double b1 = sxy / sxx;
  const double b0 = my - b1 * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) rss += std::pow(y[i] - b0 - b1 * x[i], 2);
  const auto fit = fit_ols(d, y);
  EXPECT_NEAR(fit.coef[0], b0, 1e-12);
  EXPECT_NEAR(fit.coef[1], b1, 1e-12);
  EXPECT_NEAR(fit.residual_sd, std::sqrt(rss / (n - 2)), 1e-12);
}

TEST(FitOls, RejectsDegenerateDesigns) {
  DesignMatrix d(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    d(i, 0) = 1.0;
    d(i, 1) = 2.0;
  }
  const std::vector<double> y{1.0, 2.0, 3.0};
  EXPECT_THROW(fit_ols(d, y), NumericalError);
  DesignMatrix small(2, 2);
  EXPECT_THROW(fit_ols(small, std::vector<double>{1.0, 2.0}), NumericalError);
}
