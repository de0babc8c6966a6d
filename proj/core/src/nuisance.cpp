#include "otrsens/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "otrsens/numerics.hpp"

namespace otrsens {

CovariateMask full_mask(std::size_t dim_x) {
  CovariateMask m(dim_x);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return m;
}

NuisanceMasks full_masks(std::size_t dim_x) {
  return {full_mask(dim_x), full_mask(dim_x), full_mask(dim_x)};
}

double clip_probability(double p, bool* clipped) {
  const double c = std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
  if (clipped != nullptr && c != p) *clipped = true;
  return c;
}

namespace {

void check_mask(const CovariateMask& mask, std::size_t dim_x) {
  for (std::size_t j : mask) {
    if (j >= dim_x) {
      throw std::invalid_argument(fmt::format("mask index {} exceeds covariate dimension {}", j, dim_x));
    }
  }
}

}  // namespace

InstrumentModel InstrumentModel::fit(const Dataset& data, CovariateMask mask) {
  check_mask(mask, data.dim_x());
  if (!data.has_both_arms()) {
    throw std::invalid_argument("instrument model needs both arms in the data");
  }
  DesignMatrix d(data.size(), mask.size() + 1);
  std::vector<double> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = design_row(data[i].x, mask);
    std::copy(row.begin(), row.end(), d.data.begin() + static_cast<std::ptrdiff_t>(i * d.cols));
    y[i] = data[i].z > 0 ? 1.0 : 0.0;
  }
  InstrumentModel m;
  m.fit_ = fit_logistic(d, y);
  m.mask_ = std::move(mask);
  return m;
}

double InstrumentModel::prob(int z, std::span<const double> x, bool* clipped) const {
  const double p_plus = clip_probability(expit(dot(fit_.coef, design_row(x, mask_))), clipped);
  return z > 0 ? p_plus : 1.0 - p_plus;
}

ComplianceModel ComplianceModel::fit(const Dataset& data, CovariateMask mask, bool pool_arms) {
  check_mask(mask, data.dim_x());
  std::array<bool, 3> seen{};
  for (const auto& row : data) seen[static_cast<std::size_t>(row.a + 1)] = true;
  for (int a = -1; a <= 1; ++a) {
    if (!seen[static_cast<std::size_t>(a + 1)]) {
      throw std::invalid_argument(fmt::format("compliance level A={} never observed", a));
    }
  }
  ComplianceModel m;
  for (int z : {-1, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (pool_arms || data[i].z == z) idx.push_back(i);
    }
    if (idx.empty()) {
      throw std::invalid_argument(fmt::format("compliance model: arm z={} is empty", z));
    }
    DesignMatrix d(idx.size(), mask.size() + 1);
    std::vector<std::size_t> labels(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto row = design_row(data[idx[r]].x, mask);
      std::copy(row.begin(), row.end(), d.data.begin() + static_cast<std::ptrdiff_t>(r * d.cols));
      labels[r] = static_cast<std::size_t>(data[idx[r]].a + 1);
    }
    m.arms_[arm_index(z)] = fit_multinomial(d, labels, 3, 1, kProbabilityClip);
  }
  m.mask_ = std::move(mask);
  return m;
}

std::array<double, 3> ComplianceModel::probs(int z, std::span<const double> x, bool* clipped) const {
  const auto raw = multinomial_probs(arms_[arm_index(z)], design_row(x, mask_));
  std::array<double, 3> out{};
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    out[k] = clip_probability(raw[k], clipped);
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

double ComplianceModel::prob(int a, int z, std::span<const double> x, bool* clipped) const {
  if (a < -1 || a > 1) throw std::invalid_argument("compliance must be in {-1,0,1}");
  return probs(z, x, clipped)[static_cast<std::size_t>(a + 1)];
}

OutcomeDensityModel OutcomeDensityModel::fit(const Dataset& data, CovariateMask mask,
                                             OutcomeFamily family) {
  check_mask(mask, data.dim_x());
  OutcomeDensityModel m;
  m.family_ = family;
  for (int z : {-1, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].z == z && data[i].a == z) idx.push_back(i);
    }
    DesignMatrix d(idx.size(), mask.size() + 1);
    std::vector<double> y(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto row = design_row(data[idx[r]].x, mask);
      std::copy(row.begin(), row.end(), d.data.begin() + static_cast<std::ptrdiff_t>(r * d.cols));
      y[r] = data[idx[r]].y;
    }
    if (family == OutcomeFamily::kNormal) {
      m.normal_[arm_index(z)] = fit_ols(d, y);
    } else {
      for (double& v : y) {
        if (v != 1.0 && v != -1.0) {
          throw std::invalid_argument("binary outcome family needs Y in {-1, +1}");
        }
        v = v > 0.0 ? 1.0 : 0.0;
      }
      if (idx.empty()) {
        throw std::invalid_argument(fmt::format("no rows with A = Z = {}", z));
      }
      m.binary_[arm_index(z)] = fit_logistic(d, y);
    }
  }
  m.mask_ = std::move(mask);
  return m;
}

double OutcomeDensityModel::mean(int z, std::span<const double> x) const {
  if (family_ == OutcomeFamily::kBinary) return 2.0 * p_plus(z, x) - 1.0;
  return dot(normal_[arm_index(z)].coef, design_row(x, mask_));
}

double OutcomeDensityModel::p_plus(int z, std::span<const double> x) const {
  if (family_ != OutcomeFamily::kBinary) {
    throw std::logic_error("p_plus is only defined for the binary outcome family");
  }
  return expit(dot(binary_[arm_index(z)].coef, design_row(x, mask_)));
}

NuisanceSet NuisanceSet::fit(const Dataset& data, const NuisanceMasks& masks,
                             const NuisanceOptions& options, Rng& mc_rng) {
  if (options.n_mc == 0) throw std::invalid_argument("n_mc must be positive");
  NuisanceSet ns;
  ns.instrument_ = InstrumentModel::fit(data, masks.fz);
  ns.compliance_ = ComplianceModel::fit(data, masks.fa, masks.fa_pool_arms);
  ns.outcome_q_ = OutcomeDensityModel::fit(data, masks.q, options.outcome_family);
  ns.outcome_gamma_ =
      OutcomeDensityModel::fit(data, full_mask(data.dim_x()), options.outcome_family);
  ns.draws_.resize(options.n_mc);
  for (double& e : ns.draws_) e = mc_rng.normal();
  ns.options_ = options;
  return ns;
}

namespace {

// Mean of h(y) * w(y) over y = mu + sd * e for the shared draws e.
template <typename H>
double mc_mean(const NuisanceSet& ns, const SensitivityParams& params, int z,
               std::span<const double> x, const OutcomeDensityModel& model, H&& h) {
  if (model.family() == OutcomeFamily::kBinary) {
    const double p = model.p_plus(z, x);
    return p * h(1.0) * expit(sensitivity_score(params, z, x, 1.0)) +
           (1.0 - p) * h(-1.0) * expit(sensitivity_score(params, z, x, -1.0));
  }
  const double mu = model.mean(z, x);
  const double sd = model.sd(z);
  double s = 0.0;
  for (double e : ns.draws()) {
    const double y = mu + sd * e;
    s += h(y) * expit(sensitivity_score(params, z, x, y));
  }
  return s / static_cast<double>(ns.draws().size());
}

}  // namespace

double estimate_gamma(const NuisanceSet& ns, const SensitivityParams& params, int a, int z,
                      std::span<const double> x) {
  if (a != z) return 0.0;
  return mc_mean(ns, params, z, x, ns.outcome_gamma(), [](double) { return 1.0; });
}

double estimate_Q(const NuisanceSet& ns, const SensitivityParams& params, int a, int z,
                  std::span<const double> x) {
  if (a != z) return 0.0;
  return mc_mean(ns, params, z, x, ns.outcome_q(), [](double y) { return y; });
}

double estimate_delta(const NuisanceSet& ns, const SensitivityParams& params, int a, int z,
                      std::span<const double> x) {
  const double g = estimate_gamma(ns, params, a, z, x);
  if (!(g >= 1e-12)) {
    throw NumericalError(fmt::format("gamma({},{},x) = {} is too small for delta", a, z, g));
  }
  return estimate_Q(ns, params, a, z, x) / g;
}

double compute_theta(const NuisanceSet& ns, const SensitivityParams& params, int z,
                     std::span<const double> x) {
  double theta = 0.0;
  for (int a = -1; a <= 1; ++a) {
    const int c = a * (a + z);
    if (c == 0) continue;
    theta += c / 2.0 * estimate_delta(ns, params, a, z, x);
  }
  return theta;
}

double RowNuisance::delta(int z) const {
  const double g = gamma[arm_index(z)];
  if (!(g >= 1e-12)) {
    throw NumericalError(fmt::format("gamma for arm {} is {}, too small for delta", z, g));
  }
  return q[arm_index(z)] / g;
}

NuisanceTable tabulate(const NuisanceSet& ns, const Dataset& data, const SensitivityParams& params) {
  params.validate(data.dim_x());
  NuisanceTable table;
  table.rows.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i].x;
    RowNuisance& nu = table.rows[i];
    bool clipped = false;
    for (int z : {-1, 1}) {
      const std::size_t k = arm_index(z);
      nu.fz[k] = ns.instrument().prob(z, x, &clipped);
      nu.fa[k] = ns.compliance().prob(z, z, x, &clipped);
      nu.gamma[k] = estimate_gamma(ns, params, z, z, x);
      nu.q[k] = estimate_Q(ns, params, z, z, x);
    }
    table.clipped += clipped ? 1 : 0;
  }
  return table;
}

double kappa_pseudo_outcome(const Observation& obs, const RowNuisance& nu,
                            const SensitivityParams& params) {
  if (obs.a != obs.z) return 0.0;
  const std::size_t k = arm_index(obs.z);
  const double w = complier_weight(params, obs.a, obs.z, obs.x, obs.y);
  return obs.y * w / (nu.gamma[k] * nu.fa[k]);
}

std::vector<std::size_t> make_folds(std::size_t n, std::size_t k_folds, Rng& rng) {
  if (k_folds < 2) throw std::invalid_argument("cross-fitting needs at least 2 folds");
  if (n < k_folds) throw std::invalid_argument("fewer rows than folds");
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[i] = i % k_folds;
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
    std::swap(fold[i], fold[j]);
  }
  return fold;
}

namespace {

std::vector<double> kappa_features(int z, std::span<const double> x) {
  std::vector<double> f;
  f.reserve(x.size() + 1);
  f.push_back(static_cast<double>(z));
  f.insert(f.end(), x.begin(), x.end());
  return f;
}

}  // namespace

KappaModel fit_kappa(const Dataset& data, const NuisanceTable& table,
                     const SensitivityParams& params, std::size_t k_folds,
                     const BoostingConfig& regressor, std::span<const std::size_t> folds) {
  if (k_folds < 2) throw std::invalid_argument("cross-fitting needs at least 2 folds");
  if (folds.size() != data.size() || table.size() != data.size()) {
    throw std::invalid_argument("fold labels, nuisance table and data differ in size");
  }
  std::vector<double> pseudo(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    pseudo[i] = kappa_pseudo_outcome(data[i], table[i], params);
    if (!std::isfinite(pseudo[i])) throw NumericalError("non-finite kappa pseudo-outcome");
  }
  KappaModel model;
  model.fold_.assign(folds.begin(), folds.end());
  for (std::size_t k = 0; k < k_folds; ++k) {
    std::vector<std::size_t> train;
    bool arm_seen[2] = {false, false};
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (folds[i] >= k_folds) throw std::invalid_argument("fold label out of range");
      if (folds[i] != k) {
        train.push_back(i);
        arm_seen[arm_index(data[i].z)] = true;
      }
    }
    if (!arm_seen[0] || !arm_seen[1]) {
      throw std::invalid_argument(fmt::format("training split for fold {} has a single arm", k));
    }
    DesignMatrix features(train.size(), data.dim_x() + 1);
    std::vector<double> y(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) {
      const auto f = kappa_features(data[train[r]].z, data[train[r]].x);
      std::copy(f.begin(), f.end(), features.data.begin() + static_cast<std::ptrdiff_t>(r * features.cols));
      y[r] = pseudo[train[r]];
    }
    model.models_.push_back(BoostedTrees::fit(features, y, regressor));
  }
  return model;
}

double KappaModel::predict_row(std::size_t i, int z, std::span<const double> x) const {
  return models_.at(fold_.at(i)).predict(kappa_features(z, x));
}

double KappaModel::predict_new(int z, std::span<const double> x) const {
  const auto f = kappa_features(z, x);
  double s = 0.0;
  for (const auto& m : models_) s += m.predict(f);
  return s / static_cast<double>(models_.size());
}

void attach_kappa(NuisanceTable& table, const Dataset& data, const KappaModel& model,
                  bool training_rows) {
  if (table.size() != data.size()) throw std::invalid_argument("table and data differ in size");
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int z : {-1, 1}) {
      table.rows[i].kappa[arm_index(z)] =
          training_rows ? model.predict_row(i, z, data[i].x) : model.predict_new(z, data[i].x);
    }
  }
  table.has_kappa = true;
}

}  // namespace otrsens
