#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "otrsens/datagen.hpp"
#include "otrsens/numerics.hpp"
#include "otrsens/rng.hpp"
#include "otrsens/sensitivity.hpp"

using namespace otrsens;

namespace {

double quad_gamma(double a0, double ay, double mu, double sd) {
  auto f = [&](double y) { return expit(a0 + ay * y) * normal_pdf(y, mu, sd); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, mu - 12 * sd, mu + 12 * sd,
                                                                       10, 1e-13);
}

}  // namespace

TEST(SensitivityScore, FormsEvaluateAsDocumented) {
  auto y_only = SensitivityParams::y_only(0.5, -0.25, 0.1, -0.3);
  const std::vector<double> x{2.0, -1.0};
  EXPECT_DOUBLE_EQ(sensitivity_score(y_only, -1, x, 2.0), 0.1 + 0.5 * 2.0);
  EXPECT_DOUBLE_EQ(sensitivity_score(y_only, 1, x, 2.0), -0.3 - 0.25 * 2.0);

  SensitivityParams lin;
  lin.form = SensitivityForm::kLinearXY;
  lin.plus = ArmAlpha{0.2, {1.0, 3.0}, 0.5, 0.0};
  lin.minus = ArmAlpha{0.0, {0.0, 0.0}, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(sensitivity_score(lin, 1, x, 4.0), 0.2 + 2.0 - 3.0 + 2.0);
  EXPECT_NO_THROW(lin.validate(2));
  EXPECT_THROW(lin.validate(3), std::invalid_argument);
}

TEST(ComplierWeight, ZeroOffTheComplianceDiagonal) {
  const auto p = SensitivityParams::y_only(0.5, 0.5);
  const std::vector<double> x{0.0, 0.0};
  for (int z : {-1, 1}) {
    for (int a : {-1, 0, 1}) {
      const double w = complier_weight(p, a, z, x, 1.3);
      if (a == z) {
        EXPECT_NEAR(w, expit(0.65), 1e-15);
      } else {
        EXPECT_EQ(w, 0.0);
      }
    }
  }
  EXPECT_THROW(complier_weight(p, 1, 0, x, 0.0), std::invalid_argument);
}

TEST(ComplierWeight, ZeroSlopeIsConstantInY) {
  const auto p = SensitivityParams::y_only(0.0, 0.0, 0.7, -0.2);
  const std::vector<double> x{0.3, 0.3};
  Rng rng(21, 0, Stream::kTest);
  for (int i = 0; i < 100; ++i) {
    const double y = rng.normal(0.0, 5.0);
    ASSERT_DOUBLE_EQ(complier_weight(p, 1, 1, x, y), expit(-0.2));
    ASSERT_DOUBLE_EQ(complier_weight(p, -1, -1, x, y), expit(0.7));
  }
}

TEST(GammaMc, AgreesWithAdaptiveQuadrature) {
  const std::vector<double> x{0.0, 0.0};
  for (double ay : {-1.0, 0.5, 2.0}) {
    for (double mu : {-1.0, 1.5}) {
      const auto p = SensitivityParams::y_only(ay, ay, 0.3, 0.3);
      Rng rng(22, static_cast<std::uint64_t>(100 * (ay + 3) + 10 * (mu + 2)), Stream::kTest);
      const std::size_t n = 100000;
      const double mc = gamma_mc(p, 1, 1, x, [&](Rng& r) { return r.normal(mu, 0.8); }, n, rng);
      const double ref = quad_gamma(0.3, ay, mu, 0.8);
      EXPECT_NEAR(mc, ref, 4.0 * 0.5 / std::sqrt(static_cast<double>(n))) << ay << " " << mu;
    }
  }
}

TEST(GammaMc, RejectsOffDiagonalAndEmptyDraws) {
  const auto p = SensitivityParams::y_only(0.5, 0.5);
  Rng rng(1, 0, Stream::kTest);
  const std::vector<double> x{0.0, 0.0};
  auto s = [](Rng& r) { return r.normal(); };
  EXPECT_THROW(gamma_mc(p, 0, 1, x, s, 10, rng), std::invalid_argument);
  EXPECT_THROW(gamma_mc(p, 1, 1, x, s, 0, rng), std::invalid_argument);
}

TEST(SolveAlpha0, BinaryRootReproducesTargetShare) {
  for (double p_plus : {0.1, 0.5, 0.85}) {
    for (double ay : {-1.0, 0.0, 0.7}) {
      const double p_s4 = 0.25;
      const double p_comply = 0.6;
      const double a0 = solve_alpha0(p_s4, p_comply, BinaryOutcome{p_plus}, ay);
      const double got = p_plus * expit(a0 + ay) + (1 - p_plus) * expit(a0 - ay);
      EXPECT_NEAR(got, p_s4 / p_comply, 1e-10) << p_plus << " " << ay;
    }
  }
}

TEST(SolveAlpha0, ContinuousMatchesDiscreteOnTwoPointDraws) {
  const std::vector<double> draws{-1.0, 1.0, 1.0, 1.0};
  const double a_cont = solve_alpha0(0.2, 0.5, draws, 0.4);
  const double a_bin = solve_alpha0(0.2, 0.5, BinaryOutcome{0.75}, 0.4);
  EXPECT_NEAR(a_cont, a_bin, 1e-9);
  const std::vector<double> support{-1.0, 1.0};
  const std::vector<double> pmf{0.25, 0.75};
  EXPECT_NEAR(solve_alpha0_discrete(0.4, support, pmf, 0.4), a_bin, 1e-9);
}

TEST(SolveAlpha0, RejectsInvalidTargets) {
  EXPECT_THROW(solve_alpha0(0.7, 0.5, BinaryOutcome{0.5}, 0.1), std::invalid_argument);
  EXPECT_THROW(solve_alpha0(0.0, 0.5, BinaryOutcome{0.5}, 0.1), std::invalid_argument);
  EXPECT_THROW(solve_alpha0(0.5, 0.5, BinaryOutcome{0.5}, 0.1), NumericalError);
}

TEST(FitPca1, MatchesEigenDecompositionOfTheCorrelationMatrix) {
  GenerativeConfig cfg;
  cfg.n = 400;
  const Dataset data = generate_trial(cfg, 5, 0).data;
  const PcaLoading pca = fit_pca1(data);

  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd m(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = data[static_cast<std::size_t>(i)];
    m(i, 0) = o.x[0];
    m(i, 1) = o.x[1];
    m(i, 2) = o.y;
  }
  const Eigen::RowVectorXd mu = m.colwise().mean();
  Eigen::MatrixXd c = m.rowwise() - mu;
  const Eigen::RowVectorXd sd = (c.array().square().colwise().sum() / static_cast<double>(n - 1)).sqrt();
  for (Eigen::Index j = 0; j < 3; ++j) c.col(j) /= sd(j);
  const Eigen::MatrixXd corr = c.transpose() * c / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  Eigen::VectorXd v = es.eigenvectors().col(2);
  if (v(2) < 0) v = -v;

  ASSERT_EQ(pca.loading.size(), 3u);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(pca.loading[static_cast<std::size_t>(j)], v(j), 1e-9);
    EXPECT_NEAR(pca.center[static_cast<std::size_t>(j)], mu(j), 1e-12);
    EXPECT_NEAR(pca.scale[static_cast<std::size_t>(j)], sd(j), 1e-12);
  }
  EXPECT_GE(pca.loading[2], 0.0);
}

TEST(FitPca1, ScoreUsesStandardizedCoordinates) {
  SensitivityParams p;
  p.form = SensitivityForm::kPca1;
  p.plus.a0 = 0.1;
  p.plus.a_pca = 2.0;
  p.pca = PcaLoading{{0.6, 0.0, 0.8}, {1.0, 0.0, 2.0}, {2.0, 1.0, 4.0}};
  const std::vector<double> x{3.0, 7.0};
  const double s = 0.6 * (3.0 - 1.0) / 2.0 + 0.8 * (6.0 - 2.0) / 4.0;
  EXPECT_NEAR(sensitivity_score(p, 1, x, 6.0), 0.1 + 2.0 * s, 1e-14);
  SensitivityParams unfitted;
  unfitted.form = SensitivityForm::kPca1;
  EXPECT_THROW(sensitivity_score(unfitted, 1, x, 0.0), std::invalid_argument);
}

TEST(SensitivityForm, NamesRoundTrip) {
  for (auto f : {SensitivityForm::kYOnly, SensitivityForm::kLinearXY, SensitivityForm::kPca1}) {
    EXPECT_EQ(sensitivity_form_from_string(to_string(f)), f);
  }
  EXPECT_THROW(sensitivity_form_from_string("QUADRATIC"), std::invalid_argument);
}

TEST(SensitivityScore, WorkedValues) {
  const std::vector<double> x{1.0, 1.0};
  EXPECT_DOUBLE_EQ(sensitivity_score(SensitivityParams::y_only(0.5, 0.5), 1, x, 1.0), 0.5);
  SensitivityParams lin;
  lin.form = SensitivityForm::kLinearXY;
  lin.plus = ArmAlpha{0.5, {0.3, 0.3}, 0.5, 0.0};
  lin.minus = lin.plus;
  EXPECT_NEAR(sensitivity_score(lin, 1, x, 2.0), 2.1, 1e-15);
  SensitivityParams zero;
  zero.form = SensitivityForm::kLinearXY;
  zero.plus.aX = {0.0, 0.0};
  zero.minus.aX = {0.0, 0.0};
  EXPECT_EQ(sensitivity_score(zero, -1, x, 7.0), 0.0);
  EXPECT_EQ(complier_weight(zero, 1, 1, x, 7.0), 0.5);
  EXPECT_NEAR(complier_weight(SensitivityParams::y_only(0.5, 0.5), -1, -1, x, 1.0), 0.6224593312018546, 1e-15);
}

TEST(GammaMc, ZeroAlphaIsExactlyHalf) {
  const auto p = SensitivityParams::y_only(0.0, 0.0);
  Rng rng(23, 0, Stream::kTest);
  const std::vector<double> x{0.0, 0.0};
  EXPECT_EQ(gamma_mc(p, 1, 1, x, [](Rng& r) { return r.normal(3.0, 4.0); }, 1000, rng), 0.5);
}

TEST(GammaMc, TwoPointOutcomeMatchesExactSum) {
  const auto p = SensitivityParams::y_only(1.0, 1.0);
  const double exact = 0.6 * expit(1.0) + 0.4 * expit(-1.0);
  EXPECT_NEAR(exact, 0.546211715726001, 1e-14);
  Rng rng(24, 0, Stream::kTest);
  const std::vector<double> x{0.0, 0.0};
  const std::size_t n = 20000;
  const double mc = gamma_mc(p, 1, 1, x, [](Rng& r) { return r.uniform() < 0.6 ? 1.0 : -1.0; }, n, rng);
  const double sd = (expit(1.0) - expit(-1.0)) * std::sqrt(0.24);
  EXPECT_NEAR(mc, exact, 3 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(GammaMc, NormalOutcomeAtDefaultDrawCount) {
  const auto p = SensitivityParams::y_only(0.5, 0.5);
  Rng rng(25, 0, Stream::kTest);
  const std::vector<double> x{0.0, 0.0};
  const double mc = gamma_mc(p, 1, 1, x, [](Rng& r) { return r.normal(1.0, 0.5); }, 5000, rng);
  EXPECT_NEAR(mc, quad_gamma(0.0, 0.5, 1.0, 0.5), 0.01);
}

TEST(SolveAlpha0, WorkedValues) {
  EXPECT_NEAR(solve_alpha0(0.30, 0.44, BinaryOutcome{0.5}, 0.0), logit(0.30 / 0.44), 1e-10);
  EXPECT_NEAR(logit(0.30 / 0.44), 0.7621, 1e-4);
  EXPECT_NEAR(solve_alpha0(0.2, 0.4, BinaryOutcome{0.3}, 0.0), 0.0, 1e-10);
  const double a0 = solve_alpha0(0.6, 1.0, BinaryOutcome{0.7}, 1.0);
  EXPECT_NEAR(0.7 * expit(a0 + 1.0) + 0.3 * expit(a0 - 1.0), 0.6, 1e-10);
}

TEST(FitPca1, PerfectlyCorrelatedColumnsLoadEqually) {
  std::vector<Observation> rows;
  for (int i = 0; i < 20; ++i) rows.push_back(Observation{{0.1 * i}, 1, 1, 3.0 * 0.1 * i - 2.0});
  const auto pca = fit_pca1(Dataset(std::move(rows), 1));
  EXPECT_NEAR(pca.loading[0], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(pca.loading[1], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::hypot(pca.loading[0], pca.loading[1]), 1.0, 1e-15);
}
