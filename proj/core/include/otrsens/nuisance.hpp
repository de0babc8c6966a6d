#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "otrsens/boosting.hpp"
#include "otrsens/model.hpp"
#include "otrsens/regression.hpp"
#include "otrsens/rng.hpp"
#include "otrsens/sensitivity.hpp"

namespace otrsens {

/// Indices of the covariates a working model may use. An empty mask fits an
/// intercept-only model.
using CovariateMask = std::vector<std::size_t>;

CovariateMask full_mask(std::size_t dim_x);

inline constexpr double kProbabilityClip = 1e-6;

/// Clamps p into [clip, 1 - clip]; sets *clipped when a change was made.
double clip_probability(double p, bool* clipped = nullptr);

/// Logistic model for p(Z = +1 | X).
class InstrumentModel {
 public:
  static InstrumentModel fit(const Dataset& data, CovariateMask mask);

  double prob(int z, std::span<const double> x, bool* clipped = nullptr) const;
  const std::vector<double>& coef() const { return fit_.coef; }
  const CovariateMask& mask() const { return mask_; }

 private:
  LogisticFit fit_;
  CovariateMask mask_;
};

/// Per-arm multinomial logistic model for p(A = a | Z = z, X), reference A = 0.
/// With pool_arms a single model is fitted on both arms, so the fitted law
/// ignores Z.
class ComplianceModel {
 public:
  static ComplianceModel fit(const Dataset& data, CovariateMask mask, bool pool_arms = false);

  /// Probabilities of a = -1, 0, +1, each clipped and renormalised.
  std::array<double, 3> probs(int z, std::span<const double> x, bool* clipped = nullptr) const;
  double prob(int a, int z, std::span<const double> x, bool* clipped = nullptr) const;
  const CovariateMask& mask() const { return mask_; }

 private:
  std::array<MultinomialFit, 2> arms_;
  CovariateMask mask_;
};

/// Law of Y | A = Z = z, X assumed by the outcome working model.
enum class OutcomeFamily {
  kNormal,  // linear mean, constant residual sd
  kBinary,  // Y in {-1, +1} with logistic p(Y = +1)
};

/// Working model for Y | A = Z = z, X fitted on the A = Z = z rows.
class OutcomeDensityModel {
 public:
  static OutcomeDensityModel fit(const Dataset& data, CovariateMask mask,
                                 OutcomeFamily family = OutcomeFamily::kNormal);

  OutcomeFamily family() const { return family_; }
  /// Conditional mean of Y (normal mean, or 2p - 1 for the binary family).
  double mean(int z, std::span<const double> x) const;
  /// Residual sd of the normal family.
  double sd(int z) const { return normal_[arm_index(z)].residual_sd; }
  /// p(Y = +1) under the binary family.
  double p_plus(int z, std::span<const double> x) const;
  const CovariateMask& mask() const { return mask_; }

 private:
  OutcomeFamily family_ = OutcomeFamily::kNormal;
  std::array<LinearFit, 2> normal_;
  std::array<LogisticFit, 2> binary_;
  CovariateMask mask_;
};

struct NuisanceMasks {
  CovariateMask fz;
  CovariateMask fa;
  CovariateMask q;
  bool fa_pool_arms = false;
};

NuisanceMasks full_masks(std::size_t dim_x);

struct NuisanceOptions {
  std::size_t n_mc = 5000;
  OutcomeFamily outcome_family = OutcomeFamily::kNormal;
  std::size_t kappa_folds = 5;
  BoostingConfig kappa_regressor;
};

/// Fitted working models plus the shared standard-normal draws used for every
/// Monte-Carlo integral over the outcome law. Q uses the (possibly masked)
/// outcome model; gamma always uses the full-covariate outcome model. Under
/// the binary family the integrals are exact two-point sums.
class NuisanceSet {
 public:
  static NuisanceSet fit(const Dataset& data, const NuisanceMasks& masks,
                         const NuisanceOptions& options, Rng& mc_rng);

  const InstrumentModel& instrument() const { return instrument_; }
  const ComplianceModel& compliance() const { return compliance_; }
  const OutcomeDensityModel& outcome_q() const { return outcome_q_; }
  const OutcomeDensityModel& outcome_gamma() const { return outcome_gamma_; }
  std::span<const double> draws() const { return draws_; }
  const NuisanceOptions& options() const { return options_; }

 private:
  InstrumentModel instrument_;
  ComplianceModel compliance_;
  OutcomeDensityModel outcome_q_;
  OutcomeDensityModel outcome_gamma_;
  std::vector<double> draws_;
  NuisanceOptions options_;
};

/// gamma(a,z,x) = E[w | A=a, Z=z, X=x] over the shared draws; 0 when a != z.
double estimate_gamma(const NuisanceSet& ns, const SensitivityParams& params, int a, int z,
                      std::span<const double> x);

/// Q(a,z,x) = E[Y w | A=a, Z=z, X=x] over the shared draws; 0 when a != z.
double estimate_Q(const NuisanceSet& ns, const SensitivityParams& params, int a, int z,
                  std::span<const double> x);

/// delta = Q / gamma. Throws NumericalError when gamma < 1e-12.
double estimate_delta(const NuisanceSet& ns, const SensitivityParams& params, int a, int z,
                      std::span<const double> x);

/// sum_a a(a+z) / (2 gamma(a,z,x)) * Q(a,z,x), which reduces to delta(z,z,x).
double compute_theta(const NuisanceSet& ns, const SensitivityParams& params, int z,
                     std::span<const double> x);

/// All nuisance values an estimator needs for one row, indexed by arm_index(z).
struct RowNuisance {
  std::array<double, 2> fz{};      // f(Z = z | x)
  std::array<double, 2> fa{};      // f(A = z | Z = z, x)
  std::array<double, 2> gamma{};   // gamma(z, z, x)
  std::array<double, 2> q{};       // Q(z, z, x)
  std::array<double, 2> kappa{};   // kappa(z, x)

  double delta(int z) const;
  /// theta(z, x) = delta(z) via the identity a(a+z) = 2 I(a = z).
  double theta(int z) const { return delta(z); }
  /// delta(+1) - delta(-1).
  double blip() const { return delta(1) - delta(-1); }
};

struct NuisanceTable {
  std::vector<RowNuisance> rows;
  bool has_kappa = false;
  std::size_t clipped = 0;

  std::size_t size() const { return rows.size(); }
  const RowNuisance& operator[](std::size_t i) const { return rows[i]; }
};

/// Evaluates the fitted models at every row of `data`.
NuisanceTable tabulate(const NuisanceSet& ns, const Dataset& data, const SensitivityParams& params);

/// Pseudo-outcome A(Z+A) Y w / (2 gamma f(A|Z,X)) whose conditional mean
/// given (Z, X) is kappa.
double kappa_pseudo_outcome(const Observation& obs, const RowNuisance& nu,
                            const SensitivityParams& params);

/// Cross-fitted flexible regression of the kappa pseudo-outcome on (z, x).
class KappaModel {
 public:
  /// Prediction for training row i at arm z, from the model that did not
  /// see row i.
  double predict_row(std::size_t i, int z, std::span<const double> x) const;
  /// Prediction for a point outside the training data: the fold models'
  /// average.
  double predict_new(int z, std::span<const double> x) const;

  const std::vector<std::size_t>& folds() const { return fold_; }
  std::size_t num_folds() const { return models_.size(); }

 private:
  friend KappaModel fit_kappa(const Dataset&, const NuisanceTable&, const SensitivityParams&,
                              std::size_t, const BoostingConfig&, std::span<const std::size_t>);
  std::vector<std::size_t> fold_;
  std::vector<BoostedTrees> models_;
};

/// Balanced fold labels 0..k-1 in an order shuffled by `rng`.
std::vector<std::size_t> make_folds(std::size_t n, std::size_t k_folds, Rng& rng);

/// Fits one regressor per fold on the remaining folds. Throws
/// std::invalid_argument when k < 2 or a training split lacks an arm.
KappaModel fit_kappa(const Dataset& data, const NuisanceTable& table,
                     const SensitivityParams& params, std::size_t k_folds,
                     const BoostingConfig& regressor, std::span<const std::size_t> folds);

/// Writes cross-fitted kappa predictions for both arms into the table.
void attach_kappa(NuisanceTable& table, const Dataset& data, const KappaModel& model,
                  bool training_rows);

}  // namespace otrsens
