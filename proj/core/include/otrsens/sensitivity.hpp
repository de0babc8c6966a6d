#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "otrsens/model.hpp"
#include "otrsens/rng.hpp"

namespace otrsens {

/// Functional form of the complier log-odds G(X, Y, alpha_z).
enum class SensitivityForm { kYOnly, kLinearXY, kPca1 };

std::string_view to_string(SensitivityForm form);
SensitivityForm sensitivity_form_from_string(std::string_view name);

/// Coefficients for one instrument arm.
struct ArmAlpha {
  double a0 = 0.0;
  std::vector<double> aX;  // LINEAR_XY only
  double aY = 0.0;         // Y_ONLY and LINEAR_XY
  double a_pca = 0.0;      // PCA1 only
};

/// First principal direction of the standardized (x, y) columns.
struct PcaLoading {
  std::vector<double> loading;  // length dim_x + 1, unit norm, last entry >= 0
  std::vector<double> center;
  std::vector<double> scale;
};

struct SensitivityParams {
  SensitivityForm form = SensitivityForm::kYOnly;
  ArmAlpha minus;
  ArmAlpha plus;
  std::optional<PcaLoading> pca;

  const ArmAlpha& arm(int z) const { return z > 0 ? plus : minus; }
  ArmAlpha& arm(int z) { return z > 0 ? plus : minus; }

  /// Y_ONLY parameters with the given outcome slopes and intercepts.
  static SensitivityParams y_only(double a_y_minus, double a_y_plus, double a0_minus = 0.0,
                                  double a0_plus = 0.0);

  /// Throws std::invalid_argument when the coefficients do not fit `form`
  /// and the covariate dimension.
  void validate(std::size_t dim_x) const;
};

/// G(x, y, alpha_z). PCA1 uses alpha0 + alpha_pca * <loading, standardized (x,y)>.
double sensitivity_score(const SensitivityParams& params, int z, std::span<const double> x, double y);

/// I(a = z) * expit(G).
double complier_weight(const SensitivityParams& params, int a, int z, std::span<const double> x,
                       double y);

using OutcomeSampler = std::function<double(Rng&)>;

/// Monte-Carlo estimate of gamma(a,z,x) = E[w | A=a, Z=z, X=x] using n_mc
/// draws from `sampler`.
double gamma_mc(const SensitivityParams& params, int a, int z, std::span<const double> x,
                const OutcomeSampler& sampler, std::size_t n_mc, Rng& rng);

/// Outcome law used to calibrate alpha0 in the binary case, Y in {-1,+1}.
struct BinaryOutcome {
  double p_plus;  // p(Y = +1 | A = Z = z)
};

/// Intercept making p(S4 | A = Z = z) = p_s4 / p_comply_z for binary Y.
/// Solves the quadratic in exp(-alpha0); throws NumericalError when no root
/// gives a valid probability.
double solve_alpha0(double p_s4, double p_comply_z, BinaryOutcome outcome, double alpha_y);

/// Continuous outcome version: the conditional mean of expit(alpha0 + alpha_y*y)
/// over the supplied outcome draws matches the target. Solved by bisection.
double solve_alpha0(double p_s4, double p_comply_z, std::span<const double> outcome_draws,
                    double alpha_y);

/// General version over a weighted discrete outcome law (support, pmf) with
/// an arbitrary additive offset already folded in; used by the oracle world.
double solve_alpha0_discrete(double target, std::span<const double> support,
                             std::span<const double> pmf, double alpha_y);

/// First principal component of the column-standardized (x, y) matrix.
PcaLoading fit_pca1(const Dataset& data);

}  // namespace otrsens
