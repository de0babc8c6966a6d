#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "otrsens/datagen.hpp"
#include "otrsens/numerics.hpp"
#include "otrsens/oracle.hpp"
#include "otrsens/weights.hpp"

using namespace otrsens;

namespace {

RowNuisance simple_nuisance() {
  RowNuisance nu;
  nu.fz = {0.4, 0.6};
  nu.fa = {0.7, 0.5};
  nu.gamma = {0.3, 0.45};
  nu.q = {0.2, -0.1};
  nu.kappa = {0.2 / 0.3, -0.1 / 0.45};
  return nu;
}

double conditional_mean(const DiscreteOracle& oracle, unsigned corruption, int z, double x,
                        double (*weight)(const Observation&, const RowNuisance&, const SensitivityParams&)) {
  const auto& p = oracle.truth();
  const double num = oracle.expectation(
      [&](const Observation& o, const RowNuisance& r) {
        return (o.z == z && o.x[0] == x) ? weight(o, r, p) : 0.0;
      },
      corruption);
  const double den = oracle.expectation(
      [&](const Observation& o, const RowNuisance&) { return (o.z == z && o.x[0] == x) ? 1.0 : 0.0; });
  return num / den;
}

}  // namespace

TEST(IpwWeight, HandComputedValueAndZeroOffDiagonal) {
  const auto p = SensitivityParams::y_only(0.5, 0.5);
  const auto nu = simple_nuisance();
  const Observation obs{{0.0, 0.0}, 1, 1, 2.0};
  const double w = expit(1.0);
  EXPECT_NEAR(ipw_weight(obs, nu, p), 2.0 * 2.0 * w / (2.0 * 0.45 * 0.5 * 0.6), 1e-14);
  EXPECT_EQ(ipw_weight(Observation{{0.0, 0.0}, 1, 0, 2.0}, nu, p), 0.0);
  EXPECT_EQ(ipw_weight(Observation{{0.0, 0.0}, -1, 1, 2.0}, nu, p), 0.0);
}

TEST(MrWeight, ReducesToInstrumentTimesBlipOffDiagonal) {
  const auto p = SensitivityParams::y_only(0.5, 0.5);
  const auto nu = simple_nuisance();
  const Observation obs{{0.0, 0.0}, -1, 0, 4.0};
  EXPECT_NEAR(mr_weight(obs, nu, p), -1.0 * (-0.1 / 0.45 - 0.2 / 0.3), 1e-15);
}

TEST(IpwWeight, ConditionalMeanIsDeltaUnderExactNuisances) {
  DiscreteOracle oracle;
  for (double x : {0.0, 1.0}) {
    const auto nu = oracle.nuisance(x);
    for (int z : {-1, 1}) {
      EXPECT_NEAR(conditional_mean(oracle, kCorruptNone, z, x, ipw_weight) * nu.fz[arm_index(z)],
                  nu.delta(z), 1e-12);
    }
  }
}

TEST(MrWeight, ConditionalMeanIsInstrumentTimesBlipEvenWithWrongPropensities) {
  DiscreteOracle oracle;
  for (unsigned c : {unsigned{kCorruptNone}, unsigned{kCorruptFz}, unsigned{kCorruptFa},
                     unsigned{kCorruptFz | kCorruptFa}}) {
    for (double x : {0.0, 1.0}) {
      const auto nu = oracle.nuisance(x, c);
      for (int z : {-1, 1}) {
        EXPECT_NEAR(conditional_mean(oracle, c, z, x, mr_weight), z * nu.blip(), 1e-12) << c;
      }
    }
  }
}

TEST(BaselineWeights, OwlAndIvtFormulas) {
  const auto nu = simple_nuisance();
  EXPECT_NEAR(owl_weight(Observation{{0.0}, -1, 0, 3.0}, nu), 3.0 / 0.4, 1e-15);
  EXPECT_NEAR(ivt_weight(Observation{{0.0}, 1, -1, 3.0}, nu, 0.5), -3.0 / (0.6 * 0.5), 1e-15);
  EXPECT_EQ(ivt_weight(Observation{{0.0}, 1, 0, 3.0}, nu, 0.5), 0.0);
  EXPECT_THROW(ivt_weight(Observation{{0.0}, 1, 1, 3.0}, nu, 0.0), std::domain_error);
}

TEST(ComplianceGap, SampleProportionsAndSignCheck) {
  const Dataset d({Observation{{0.0}, 1, 1, 0.0}, Observation{{0.0}, 1, 0, 0.0}, Observation{{0.0}, -1, 1, 0.0},
                   Observation{{0.0}, -1, -1, 0.0}, Observation{{0.0}, -1, -1, 0.0}, Observation{{0.0}, -1, 0, 0.0}},
                  1);
  EXPECT_NEAR(compliance_gap(d), 0.5 - 0.25, 1e-15);
  const Dataset reversed({Observation{{0.0}, 1, 0, 0.0}, Observation{{0.0}, -1, 1, 0.0}}, 1);
  EXPECT_THROW(compliance_gap(reversed), std::domain_error);
}

TEST(ComputeWeights, LabelsMethodsAndMarginalBaseline) {
  GenerativeConfig cfg;
  cfg.n = 300;
  const Dataset data = generate_trial(cfg, 61, 0).data;
  NuisanceTable table;
  for (std::size_t i = 0; i < data.size(); ++i) table.rows.push_back(simple_nuisance());
  const auto p = SensitivityParams::y_only(0.5, 0.5);

  const auto ipw = compute_weights(Method::kIpw, data, table, p);
  const auto ivt = compute_weights(Method::kIvt, data, table, p);
  const auto owl_model = compute_weights(Method::kOwl, data, table, p, BaselinePropensity::kModel);
  const auto owl_marg = compute_weights(Method::kOwl, data, table, p, BaselinePropensity::kMarginal);
  const double share_plus = static_cast<double>(data.count_arm(1)) / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(ipw.labels[i], data[i].z);
    EXPECT_EQ(ivt.labels[i], data[i].a);
    EXPECT_NEAR(owl_model.values[i], owl_weight(data[i], table[i]), 1e-15);
    const double fz = data[i].z > 0 ? share_plus : 1.0 - share_plus;
    EXPECT_NEAR(owl_marg.values[i], data[i].y / fz, 1e-12);
  }
  EXPECT_GT(ipw.zero_fraction, 0.0);
  EXPECT_THROW(compute_weights(Method::kMrKnownFz, data, table, p), std::invalid_argument);

  std::ostringstream out;
  write_weights_csv(out, ipw);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "row,weight,method");
}

TEST(BaselineWeights, ZeroOutcomeAndRandomizedInstrument) {
  const auto p = SensitivityParams::y_only(0.5, 0.5);
  auto nu = simple_nuisance();
  EXPECT_EQ(ipw_weight(Observation{{0.0, 0.0}, 1, 1, 0.0}, nu, p), 0.0);
  EXPECT_EQ(owl_weight(Observation{{0.0}, 1, 1, 0.0}, nu), 0.0);
  nu.fz = {0.5, 0.5};
  EXPECT_DOUBLE_EQ(owl_weight(Observation{{0.0}, -1, 0, 1.25}, nu), 2.5);
}

TEST(Blip, SymmetricArmsGiveZero) {
  RowNuisance nu;
  nu.gamma = {0.4, 0.4};
  nu.q = {0.3, 0.3};
  EXPECT_EQ(blip(nu), 0.0);
  nu.q = {0.1, 0.3};
  EXPECT_NEAR(blip(nu), 0.5, 1e-15);
}
