#include "otrsens/model.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "otrsens/numerics.hpp"

namespace otrsens {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kIpw: return "IPW";
    case Method::kMr: return "MR";
    case Method::kMrKnownFz: return "MR_KNOWN_FZ";
    case Method::kOwl: return "OWL";
    case Method::kIvt: return "IVT";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  if (name == "IPW") return Method::kIpw;
  if (name == "MR") return Method::kMr;
  if (name == "MR_KNOWN_FZ") return Method::kMrKnownFz;
  if (name == "OWL") return Method::kOwl;
  if (name == "IVT") return Method::kIvt;
  throw std::invalid_argument(fmt::format("unknown method '{}'", name));
}

void validate(const Observation& obs) {
  if (obs.z != 1 && obs.z != -1) {
    throw std::invalid_argument(fmt::format("instrument must be -1 or +1, got {}", obs.z));
  }
  if (obs.a < -1 || obs.a > 1) {
    throw std::invalid_argument(fmt::format("compliance must be in {{-1,0,1}}, got {}", obs.a));
  }
  if (!std::isfinite(obs.y)) {
    throw std::invalid_argument("outcome must be finite");
  }
  for (double v : obs.x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("covariates must be finite");
    }
  }
}

Dataset::Dataset(std::vector<Observation> rows, std::size_t dim_x)
    : rows_(std::move(rows)), dim_x_(dim_x) {
  if (rows_.empty()) {
    throw std::invalid_argument("dataset must be nonempty");
  }
  for (const auto& row : rows_) {
    if (row.x.size() != dim_x_) {
      throw std::invalid_argument(
          fmt::format("row has {} covariates, expected {}", row.x.size(), dim_x_));
    }
    validate(row);
  }
}

std::size_t Dataset::count_arm(int z) const {
  std::size_t c = 0;
  for (const auto& row : rows_) {
    c += row.z == z ? 1 : 0;
  }
  return c;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Observation> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back(rows_.at(i));
  }
  return Dataset(std::move(out), dim_x_);
}

PrincipalStratum principal_stratum(Stratum label) {
  switch (label) {
    case Stratum::kS1: return {label, -1, -1};
    case Stratum::kS2: return {label, 1, 1};
    case Stratum::kS3: return {label, 0, 0};
    case Stratum::kS4: return {label, -1, 1};
    case Stratum::kS5: return {label, -1, 0};
    case Stratum::kS6: return {label, 0, 1};
    case Stratum::kS7: return {label, 1, -1};
    case Stratum::kS8: return {label, 1, 0};
    case Stratum::kS9: return {label, 0, -1};
  }
  throw std::invalid_argument("unknown stratum");
}

std::string_view to_string(Stratum label) {
  static constexpr std::string_view kNames[] = {"S1", "S2", "S3", "S4", "S5",
                                                "S6", "S7", "S8", "S9"};
  const int i = static_cast<int>(label) - 1;
  if (i < 0 || i > 8) {
    throw std::invalid_argument("unknown stratum");
  }
  return kNames[i];
}

bool violates_monotonicity(Stratum label) {
  return label == Stratum::kS7 || label == Stratum::kS8 || label == Stratum::kS9;
}

double LinearPolicy::decision(std::span<const double> x) const {
  if (x.size() != beta.size()) {
    throw std::invalid_argument(
        fmt::format("policy expects {} covariates, got {}", beta.size(), x.size()));
  }
  double g = beta0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    g += beta[j] * x[j];
  }
  return g;
}

LinearPolicy LinearPolicy::negated() const {
  LinearPolicy out{-beta0, beta};
  for (double& b : out.beta) {
    b = -b;
  }
  return out;
}

int policy_decide(const LinearPolicy& policy, std::span<const double> x) {
  return policy.decision(x) >= 0.0 ? 1 : -1;
}

double correct_classification_rate(const LinearPolicy& policy, std::span<const EvalPoint> eval_set) {
  if (eval_set.empty()) {
    throw std::invalid_argument("classification rate needs a nonempty evaluation set");
  }
  std::size_t hits = 0;
  for (const auto& p : eval_set) {
    hits += policy_decide(policy, p.x) == p.optimal_action ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(eval_set.size());
}

EstimateWithSE estimate_from_rows(std::span<const double> row_values, Method method,
                                  std::vector<double>* contributions) {
  if (row_values.empty()) {
    throw std::invalid_argument("estimate needs at least one row");
  }
  for (double v : row_values) {
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite estimating-equation contribution");
    }
  }
  EstimateWithSE out;
  out.method = method;
  out.n = row_values.size();
  out.estimate = mean(row_values);
  std::vector<double> centred(row_values.size());
  for (std::size_t i = 0; i < row_values.size(); ++i) {
    centred[i] = row_values[i] - out.estimate;
  }
  out.se = sample_sd(centred) / std::sqrt(static_cast<double>(out.n));
  if (contributions != nullptr) {
    *contributions = std::move(centred);
  }
  return out;
}

}  // namespace otrsens
