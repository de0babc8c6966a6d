#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace otrsens {

/// Dense row-major design matrix.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DesignMatrix() = default;
  DesignMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

/// Design row (1, x[mask[0]], x[mask[1]], ...).
std::vector<double> design_row(std::span<const double> x, std::span<const std::size_t> mask);

struct LogisticFit {
  std::vector<double> coef;
  int iterations = 0;
  double max_abs_score = 0.0;
};

/// Binary logistic regression by iteratively reweighted least squares.
/// Converged when max|score| < 1e-8; stops after 100 iterations. Throws
/// NumericalError when the coefficient norm exceeds 1e4 (separation).
LogisticFit fit_logistic(const DesignMatrix& design, std::span<const double> y01);

struct MultinomialFit {
  /// coef[k] holds the coefficients of category k against the reference
  /// category; coef[reference] is all zero.
  std::vector<std::vector<double>> coef;
  std::size_t reference = 0;
  int iterations = 0;
};

/// Multinomial logistic regression by Newton's method on the full Hessian.
/// `labels` take values in [0, n_categories). Categories absent from the
/// data are left out of the fit and given the coefficient vector
/// (log(absent_prob_floor), 0, ..., 0) relative to the reference.
MultinomialFit fit_multinomial(const DesignMatrix& design, std::span<const std::size_t> labels,
                               std::size_t n_categories, std::size_t reference,
                               double absent_prob_floor);

std::vector<double> multinomial_probs(const MultinomialFit& fit, std::span<const double> row);

struct LinearFit {
  std::vector<double> coef;
  double residual_sd = 0.0;
};

/// Ordinary least squares with residual sd sqrt(RSS / (m - p)).
LinearFit fit_ols(const DesignMatrix& design, std::span<const double> y);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace otrsens
