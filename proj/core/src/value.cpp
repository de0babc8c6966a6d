#include "otrsens/value.hpp"

#include <stdexcept>

#include "otrsens/weights.hpp"

namespace otrsens {
namespace {

void check_sizes(const Dataset& data, const NuisanceTable& table) {
  if (table.size() != data.size()) {
    throw std::invalid_argument("nuisance table and data differ in size");
  }
}

// T1 - T3 - T4 evaluated with instrument propensity fz for the row's arm.
double three_term_row(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params,
                      bool agrees, double fz) {
  if (!agrees) return 0.0;
  const std::size_t k = arm_index(obs.z);
  const double g = nu.gamma[k];
  const double denom = 2.0 * g * fz * nu.fa[k];
  const int c = obs.a * (obs.z + obs.a);
  const double w = complier_weight(params, obs.a, obs.z, obs.x, obs.y);
  const double t1 = c * obs.y * w / denom;
  const double t3 = c * nu.delta(obs.z) * (w - g) / denom;
  double theta_term = 0.0;
  for (int a = -1; a <= 1; ++a) {
    const int ca = a * (a + obs.z);
    if (ca == 0) continue;
    // Only a = z survives; gamma(a,z,x) and Q(a,z,x) are the arm-z values.
    theta_term += ca * nu.q[k] / (2.0 * g * fz);
  }
  const double t4 = c * nu.q[k] / denom - theta_term;
  return t1 - t3 - t4;
}

}  // namespace

EstimateWithSE ipw_value(const Dataset& data, const LinearPolicy& policy, const NuisanceTable& table,
                         const SensitivityParams& params, std::vector<double>* contributions) {
  check_sizes(data, table);
  std::vector<double> rows(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool agrees = policy_decide(policy, data[i].x) == data[i].z;
    rows[i] = agrees ? ipw_weight(data[i], table[i], params) : 0.0;
  }
  return estimate_from_rows(rows, Method::kIpw, contributions);
}

double mr_value_row(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params,
                    int decision) {
  const bool agrees = decision == obs.z;
  const std::size_t k = arm_index(obs.z);
  const double kappa_prime = nu.kappa[arm_index(decision)];
  const double t2 = (agrees ? nu.kappa[k] / nu.fz[k] : 0.0) - kappa_prime;
  return three_term_row(obs, nu, params, agrees, nu.fz[k]) - t2;
}

EstimateWithSE mr_value(const Dataset& data, const LinearPolicy& policy, const NuisanceTable& table,
                        const SensitivityParams& params, std::vector<double>* contributions) {
  check_sizes(data, table);
  if (!table.has_kappa) {
    throw std::invalid_argument("mr_value needs a fitted kappa");
  }
  std::vector<double> rows(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    rows[i] = mr_value_row(data[i], table[i], params, policy_decide(policy, data[i].x));
  }
  return estimate_from_rows(rows, Method::kMr, contributions);
}

EstimateWithSE mr_value_known_fz(const Dataset& data, const LinearPolicy& policy,
                                 const NuisanceTable& table, const SensitivityParams& params,
                                 const InstrumentPropensity& true_fz,
                                 std::vector<double>* contributions) {
  check_sizes(data, table);
  std::vector<double> rows(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& obs = data[i];
    const bool agrees = policy_decide(policy, obs.x) == obs.z;
    const double fz = true_fz(obs.z, obs.x);
    if (!(fz > 0.0 && fz < 1.0)) {
      throw std::invalid_argument("known instrument propensity must lie in (0,1)");
    }
    rows[i] = three_term_row(obs, table[i], params, agrees, fz);
  }
  return estimate_from_rows(rows, Method::kMrKnownFz, contributions);
}

EstimateWithSE mr_value_known_fz(const Dataset& data, const LinearPolicy& policy,
                                 const NuisanceTable& table, const SensitivityParams& params,
                                 double p_plus, std::vector<double>* contributions) {
  return mr_value_known_fz(
      data, policy, table, params,
      [p_plus](int z, std::span<const double>) { return z > 0 ? p_plus : 1.0 - p_plus; },
      contributions);
}

double psi_mr_row(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params) {
  const int c = obs.a * (obs.a + obs.z);
  double aug = 0.0;
  if (c != 0) {
    const std::size_t k = arm_index(obs.z);
    const double g = nu.gamma[k];
    const double w = complier_weight(params, obs.a, obs.z, obs.x, obs.y);
    aug = obs.z * c * (obs.y * w - nu.q[k] - nu.delta(obs.z) * (w - g)) /
          (2.0 * g * nu.fa[k] * nu.fz[k]);
  }
  return aug + nu.blip();
}

EstimateWithSE psi_mr(const Dataset& data, const NuisanceTable& table, const SensitivityParams& params,
                      std::vector<double>* contributions) {
  check_sizes(data, table);
  std::vector<double> rows(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) rows[i] = psi_mr_row(data[i], table[i], params);
  return estimate_from_rows(rows, Method::kMr, contributions);
}

}  // namespace otrsens
