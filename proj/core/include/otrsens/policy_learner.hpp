#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "otrsens/model.hpp"
#include "otrsens/weights.hpp"

namespace otrsens {

struct LearnerConfig {
  double lambda = 0.01;
  std::size_t max_iter = 20000;
  /// Relative objective improvement below which the solver stops, checked
  /// every 50 iterations.
  double tolerance = 1e-6;
  /// Constant c of the step size c / (sqrt(t) * mean|W|).
  double step_scale = 1.0;
  std::vector<double> lambda_grid;
  std::size_t cv_folds = 5;

  void validate() const;
};

/// (1/n) sum |W_i| max(0, 1 - sign(W_i) L_i g(x_i)) + (lambda/2) |beta|^2 with
/// L_i the weight label and an unpenalised intercept.
double hinge_objective(const Dataset& data, const WeightVector& weights, const LinearPolicy& policy,
                       double lambda);

struct LearnResult {
  LinearPolicy policy;
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// Minimises the hinge objective by full-batch subgradient descent with
/// iterate averaging, started at zero. Returns the better of the averaged
/// and the best visited iterate.
LearnResult learn_policy_detailed(const Dataset& data, const WeightVector& weights,
                                  const LearnerConfig& cfg);

LinearPolicy learn_policy(const Dataset& data, const WeightVector& weights, const LearnerConfig& cfg);

/// Cross-validated choice of lambda from cfg.lambda_grid, scored by held-out
/// weighted agreement sum |W_i| I{sign(W_i) L_i = pi(x_i)}. Ties go to the
/// smallest lambda. Folds are assigned round-robin by row index.
double select_lambda(const Dataset& data, const WeightVector& weights, const LearnerConfig& cfg);

/// Held-out weighted agreement for one lambda (summed over folds).
double cv_agreement(const Dataset& data, const WeightVector& weights, const LearnerConfig& cfg,
                    double lambda);

std::string policy_to_json(const LinearPolicy& policy);
LinearPolicy policy_from_json(const std::string& text);

}  // namespace otrsens
