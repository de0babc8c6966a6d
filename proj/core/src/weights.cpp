#include "otrsens/weights.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "otrsens/numerics.hpp"

namespace otrsens {

double ipw_weight(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params) {
  const int c = obs.a * (obs.a + obs.z);
  if (c == 0) return 0.0;
  const std::size_t k = arm_index(obs.z);
  const double w = complier_weight(params, obs.a, obs.z, obs.x, obs.y);
  return c * obs.y * w / (2.0 * nu.gamma[k] * nu.fa[k] * nu.fz[k]);
}

double blip(const RowNuisance& nu) { return nu.blip(); }

double mr_weight(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params) {
  const double zdelta = obs.z * nu.blip();
  const int c = obs.a * (obs.a + obs.z);
  if (c == 0) return zdelta;
  const std::size_t k = arm_index(obs.z);
  const double w = complier_weight(params, obs.a, obs.z, obs.x, obs.y);
  const double g = nu.gamma[k];
  const double bracket = obs.y * w - nu.q[k] - nu.delta(obs.z) * (w - g);
  return c * bracket / (2.0 * g * nu.fa[k] * nu.fz[k]) + zdelta;
}

double owl_weight(const Observation& obs, const RowNuisance& nu) {
  return obs.y / nu.fz[arm_index(obs.z)];
}

double ivt_weight(const Observation& obs, const RowNuisance& nu, double compliance_gap) {
  if (!(compliance_gap > 0.0)) {
    throw std::domain_error("IVT weight needs a positive compliance gap");
  }
  return obs.z * obs.a * obs.y / (nu.fz[arm_index(obs.z)] * compliance_gap);
}

double compliance_gap(const Dataset& data) {
  double treated[2] = {0.0, 0.0};
  double total[2] = {0.0, 0.0};
  for (const auto& row : data) {
    const std::size_t k = arm_index(row.z);
    total[k] += 1.0;
    treated[k] += row.a == 1 ? 1.0 : 0.0;
  }
  if (total[0] == 0.0 || total[1] == 0.0) {
    throw std::invalid_argument("compliance gap needs both arms");
  }
  const double gap = treated[1] / total[1] - treated[0] / total[0];
  if (!(gap > 0.0)) {
    throw std::domain_error(fmt::format(
        "compliance gap {} is not positive; the instrument is weak or invalid", gap));
  }
  return gap;
}

WeightVector compute_weights(Method method, const Dataset& data, const NuisanceTable& table,
                             const SensitivityParams& params, BaselinePropensity baseline) {
  if (table.size() != data.size()) {
    throw std::invalid_argument("nuisance table and data differ in size");
  }
  WeightVector out;
  out.method = method;
  out.clipped = table.clipped;
  out.values.resize(data.size());
  out.labels.resize(data.size());
  const double gap = method == Method::kIvt ? compliance_gap(data) : 0.0;
  const bool marginal = baseline == BaselinePropensity::kMarginal &&
                        (method == Method::kOwl || method == Method::kIvt);
  RowNuisance shares;
  if (marginal) {
    const double n = static_cast<double>(data.size());
    shares.fz = {static_cast<double>(data.count_arm(-1)) / n, static_cast<double>(data.count_arm(1)) / n};
    if (shares.fz[0] == 0.0 || shares.fz[1] == 0.0) {
      throw std::invalid_argument("marginal instrument propensity needs both arms");
    }
  }
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Observation& obs = data[i];
    const RowNuisance& nu = marginal ? shares : table[i];
    double v = 0.0;
    switch (method) {
      case Method::kIpw: v = ipw_weight(obs, table[i], params); break;
      case Method::kMr: v = mr_weight(obs, table[i], params); break;
      case Method::kOwl: v = owl_weight(obs, nu); break;
      case Method::kIvt: v = ivt_weight(obs, nu, gap); break;
      case Method::kMrKnownFz:
        throw std::invalid_argument("MR_KNOWN_FZ is a value estimator, not a weighting scheme");
    }
    if (!std::isfinite(v)) {
      throw NumericalError(fmt::format("non-finite {} weight at row {}", to_string(method), i));
    }
    out.values[i] = v;
    out.labels[i] = method == Method::kIvt ? obs.a : obs.z;
    zeros += v == 0.0 ? 1 : 0;
  }
  out.zero_fraction = static_cast<double>(zeros) / static_cast<double>(data.size());
  return out;
}

void write_weights_csv(std::ostream& out, const WeightVector& weights) {
  out << "row,weight,method\n";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out << fmt::format("{},{:.17g},{}\n", i, weights.values[i], to_string(weights.method));
  }
}

}  // namespace otrsens
