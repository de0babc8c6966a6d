#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "otrsens/datagen.hpp"
#include "otrsens/numerics.hpp"
#include "otrsens/rng.hpp"

using namespace otrsens;
using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

namespace {

double bridge_cdf_by_quadrature(double phi, double u) {
  // Split at zero so the adaptive rule sees the peak.
  auto f = [phi](double t) { return bridge_density(phi, t); };
  const double tail = GK::integrate(f, -200.0, std::min(u, 0.0), 15, 1e-14);
  return u <= 0.0 ? tail : tail + GK::integrate(f, 0.0, u, 15, 1e-14);
}

}  // namespace

TEST(Bridge, DensityIntegratesToOneAndQuantileInvertsCdf) {
  for (double phi : {0.3, 0.5, 0.8}) {
    auto f = [phi](double t) { return bridge_density(phi, t); };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double total = ts.integrate(f, -std::numeric_limits<double>::infinity(),
                                      std::numeric_limits<double>::infinity());
    EXPECT_NEAR(total, 1.0, 1e-10) << phi;
    for (double p : {0.01, 0.2, 0.5, 0.77, 0.99}) {
      EXPECT_NEAR(bridge_cdf_by_quadrature(phi, bridge_quantile(phi, p)), p, 1e-9) << phi << " " << p;
    }
  }
}

TEST(Bridge, SamplerPassesKolmogorovSmirnov) {
  const double phi = 0.5;
  Rng rng(91, 0, Stream::kTest);
  const std::size_t n = 1000000;
  std::vector<double> u(n);
  for (auto& v : u) v = sample_bridge(phi, rng);
  std::sort(u.begin(), u.end());
  // Closed-form CDF inverse of the quantile: F(u) = 1/2 + atan(tan(phi*pi/2) tanh(phi*u/2)) / (phi*pi).
  auto cdf = [phi](double t) {
    return 0.5 + std::atan(std::tan(phi * std::numbers::pi / 2) * std::tanh(phi * t / 2)) / (phi * std::numbers::pi);
  };
  EXPECT_NEAR(cdf(1.3), bridge_cdf_by_quadrature(phi, 1.3), 1e-9);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(u[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 0.002);
}

TEST(Bridge, MarginalisingTheLatentLogitAttenuatesBySlopePhi) {
  const double phi = 0.5;
  for (double eta : {-2.0, 0.3, 1.5}) {
    auto f = [&](double t) { return expit(eta + t) * bridge_density(phi, t); };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double exact = ts.integrate(f, -std::numeric_limits<double>::infinity(),
                                      std::numeric_limits<double>::infinity());
    EXPECT_NEAR(exact, expit(phi * eta), 1e-9) << eta;
    Rng rng(92, static_cast<std::uint64_t>(10 * (eta + 3)), Stream::kTest);
    const std::size_t n = 100000;
    std::vector<double> v(n);
    for (auto& s : v) s = expit(eta + sample_bridge(phi, rng));
    EXPECT_NEAR(mean(v), expit(phi * eta), 4 * sample_sd(v) / std::sqrt(static_cast<double>(n)));
  }
}

TEST(Strata, ProbabilitiesSumToOneAndRespectMonotonicity) {
  GenerativeConfig cfg;
  Rng rng(93, 0, Stream::kTest);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto p = stratum_probabilities(cfg, x, rng.sign_bernoulli(0.5), rng.normal());
    double s = 0.0;
    for (double v : p) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
  EXPECT_EQ(compliance_from_stratum(Stratum::kS4, 1), 1);
  EXPECT_EQ(compliance_from_stratum(Stratum::kS4, -1), -1);
  EXPECT_EQ(compliance_from_stratum(Stratum::kS6, -1), 0);
  EXPECT_THROW(compliance_from_stratum(Stratum::kS8, 1), std::invalid_argument);
}

TEST(TiltedMean, AgreesWithAdaptiveQuadrature) {
  GenerativeConfig cfg;
  Rng rng(94, 0, Stream::kTest);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (int z : {-1, 1}) {
      const auto& arm = cfg.arm(z);
      const double mu = arm.mean(x);
      auto dens = [&](double y) { return complier_weight(cfg.truth, z, z, x, y) * normal_pdf(y, mu, arm.sd); };
      const double num = GK::integrate([&](double y) { return y * dens(y); }, mu - 12 * arm.sd, mu + 12 * arm.sd, 10, 1e-14);
      const double den = GK::integrate(dens, mu - 12 * arm.sd, mu + 12 * arm.sd, 10, 1e-14);
      EXPECT_NEAR(tilted_mean(cfg, x, z), num / den, 1e-10);
    }
  }
}

TEST(RejectionSampler, ChiSquareGoodnessOfFit) {
  GenerativeConfig cfg;
  const std::vector<double> x{0.4, -0.2};
  const int z = -1;
  const auto& arm = cfg.arm(z);
  const double mu = arm.mean(x);
  auto dens = [&](double y) { return complier_weight(cfg.truth, z, z, x, y) * normal_pdf(y, mu, arm.sd); };
  const double lo = mu - 4 * arm.sd, hi = mu + 4 * arm.sd;
  const double total = GK::integrate(dens, mu - 12 * arm.sd, mu + 12 * arm.sd, 10, 1e-14);
  const int bins = 20;
  std::vector<double> expected(bins + 2);
  expected[0] = GK::integrate(dens, mu - 12 * arm.sd, lo, 10, 1e-14) / total;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + (hi - lo) * b / bins;
    expected[b + 1] = GK::integrate(dens, a, a + (hi - lo) / bins, 10, 1e-14) / total;
  }
  expected[bins + 1] = GK::integrate(dens, hi, mu + 12 * arm.sd, 10, 1e-14) / total;

  Rng rng(95, 0, Stream::kTest);
  const int n = 40000;
  std::vector<double> observed(bins + 2, 0.0);
  for (int i = 0; i < n; ++i) {
    const double y = rejection_sample_complier_y(cfg, x, z, rng);
    int k = y < lo ? 0 : y >= hi ? bins + 1 : 1 + static_cast<int>((y - lo) / (hi - lo) * bins);
    k = std::clamp(k, 0, bins + 1);
    observed[k] += 1.0;
  }
  double chi2 = 0.0;
  int used = 0;
  for (int k = 0; k < bins + 2; ++k) {
    const double e = n * expected[k];
    if (e < 5.0) continue;
    chi2 += std::pow(observed[k] - e, 2) / e;
    ++used;
  }
  const boost::math::chi_squared dist(used - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.999)) << "chi2 " << chi2 << " df " << used - 1;
}

TEST(GenerateTrial, DeterministicAndConsistentWithStrata) {
  GenerativeConfig cfg;
  cfg.n = 300;
  const Trial a = generate_trial(cfg, 96, 3);
  const Trial b = generate_trial(cfg, 96, 3);
  const Trial c = generate_trial(cfg, 96, 4);
  ASSERT_EQ(a.data.size(), 300u);
  std::size_t compliers = 0;
  bool differs = false;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    EXPECT_EQ(a.data[i].y, b.data[i].y);
    differs |= a.data[i].y != c.data[i].y;
    const auto& t = a.truth[i];
    EXPECT_FALSE(violates_monotonicity(t.stratum));
    EXPECT_EQ(a.data[i].a, a.data[i].z > 0 ? t.a_plus : t.a_minus);
    compliers += t.stratum == Stratum::kS4;
    EXPECT_EQ(t.optimal_action, optimal_action(cfg, a.data[i].x));
    for (double v : a.data[i].x) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(compliers, a.compliers);
}

TEST(TruthOracle, OptimalValueDominatesAndMatchesMonteCarlo) {
  GenerativeConfig cfg;
  const TruthOracle oracle(cfg, 5000, 97);
  Rng rng(98, 0, Stream::kTest);
  for (int i = 0; i < 30; ++i) {
    const LinearPolicy p{rng.normal(), {rng.normal(), rng.normal()}};
    EXPECT_LE(oracle.value(p), oracle.optimal_value() + 1e-15);
  }
  const LinearPolicy pol{0.0, {1.0, 0.0}};
  Rng mc(99, 0, Stream::kTruth);
  const double mc_value = true_complier_value(pol, cfg, 20000, mc);
  EXPECT_NEAR(mc_value, oracle.value(pol), 0.03);
}

TEST(Bridge, MedianIsZeroAndSampleMeanVanishes) {
  EXPECT_NEAR(bridge_quantile(0.5, 0.5), 0.0, 1e-14);
  Rng rng(101, 0, Stream::kTest);
  const int n = 1000000;
  std::vector<double> draws(n);
  for (double& d : draws) d = sample_bridge(0.5, rng);
  const double mean = pairwise_sum(draws) / n;
  EXPECT_NEAR(mean, 0.0, 4 * sample_sd(draws) / std::sqrt(static_cast<double>(n)));
}

TEST(Strata, WorkedProbabilityAtTheOrigin) {
  GenerativeConfig cfg;
  const std::vector<double> x{0.0, 0.0};
  const auto p = stratum_probabilities(cfg, x, 1, 0.0);
  EXPECT_NEAR(p[2], 1.0 / (1.0 + 5.0 * std::exp(0.5)), 1e-15);
}

TEST(Strata, EmpiricalFrequenciesMatchTheSoftmax) {
  GenerativeConfig cfg;
  const std::vector<double> x{0.3, -0.6};
  const auto p = stratum_probabilities(cfg, x, -1, 0.7);
  Rng rng(102, 0, Stream::kTest);
  std::array<double, 6> counts{};
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_stratum(cfg, x, -1, 0.7, rng);
    counts[static_cast<int>(s.label) - 1] += 1.0;
  }
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(counts[k] / n, p[k], 0.003) << "S" << k + 1;
}

TEST(Strata, CompliancePairsFromTheLookup) {
  EXPECT_EQ(compliance_from_stratum(Stratum::kS3, -1), 0);
  EXPECT_EQ(compliance_from_stratum(Stratum::kS5, 1), 0);
  EXPECT_EQ(compliance_from_stratum(Stratum::kS1, 1), -1);
  EXPECT_EQ(compliance_from_stratum(Stratum::kS2, -1), 1);
}

TEST(RejectionSampler, UntiltedLawReproducesTheCellMean) {
  GenerativeConfig cfg;
  cfg.truth = SensitivityParams::y_only(0.0, 0.0);
  const std::vector<double> x{0.0, 0.0};
  Rng rng(103, 0, Stream::kTest);
  const int n = 100000;
  std::vector<double> ys(n);
  for (double& y : ys) y = rejection_sample_complier_y(cfg, x, 1, rng);
  EXPECT_NEAR(pairwise_sum(ys) / n, 1.0, 4 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(RejectionSampler, AcceptanceRatioNeverExceedsOne) {
  GenerativeConfig cfg;
  Rng rng(104, 0, Stream::kTest);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const int z = rng.sign_bernoulli(0.5);
    const double env = rejection_envelope(cfg, x, z);
    for (int k = 0; k < 100; ++k) {
      const double y = rng.normal(cfg.proposal_mean, cfg.proposal_sd);
      worst = std::max(worst, acceptance_ratio(cfg, x, z, y, env));
    }
  }
  EXPECT_GT(worst, 0.0);
  EXPECT_LE(worst, 1.0);
}

TEST(TiltedMean, AgreesWithImportanceSampling) {
  GenerativeConfig cfg;
  const std::vector<double> x{-0.5, 0.25};
  Rng rng(105, 0, Stream::kTest);
  for (int z : {-1, 1}) {
    const auto& arm = cfg.arm(z);
    const double mu = arm.mean(x);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 1000000; ++i) {
      const double y = rng.normal(mu, arm.sd);
      const double w = complier_weight(cfg.truth, z, z, x, y);
      num += w * y;
      den += w;
    }
    EXPECT_NEAR(tilted_mean(cfg, x, z), num / den, 5e-3) << z;
  }
}

TEST(TiltedMean, UntiltedBlipAtTwoPoints) {
  GenerativeConfig cfg;
  cfg.truth = SensitivityParams::y_only(0.0, 0.0);
  const std::vector<double> origin{0.0, 0.0}, corner{-0.5, -0.5};
  EXPECT_NEAR(tilted_mean(cfg, origin, 1) - tilted_mean(cfg, origin, -1), 0.0, 1e-12);
  EXPECT_NEAR(tilted_mean(cfg, corner, 1) - tilted_mean(cfg, corner, -1), 2.0, 1e-12);
}

TEST(GenerateTrial, NeverTakersUnderEncouragementSitNearFive) {
  GenerativeConfig cfg;
  cfg.n = 20000;
  const Trial t = generate_trial(cfg, 106, 0);
  std::vector<double> ys;
  for (const auto& o : t.data) {
    if (o.z == 1 && o.a == 0) ys.push_back(o.y);
  }
  ASSERT_GT(ys.size(), 200u);
  EXPECT_NEAR(pairwise_sum(ys) / static_cast<double>(ys.size()), 5.0, 0.01);
  EXPECT_NEAR(sample_sd(ys), 0.1, 0.01);
}
