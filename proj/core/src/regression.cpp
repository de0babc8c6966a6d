#include "otrsens/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "otrsens/numerics.hpp"

namespace otrsens {
namespace {

constexpr double kSeparationNorm = 1e4;
constexpr double kScoreTolerance = 1e-8;
constexpr int kMaxIterations = 100;
// Newton's method drives the score to zero on separable data long before the
// coefficients reach kSeparationNorm, so saturated fits are flagged directly.
constexpr double kSaturation = 1e-8;

Eigen::MatrixXd to_eigen(const DesignMatrix& d) {
  Eigen::MatrixXd m(d.rows, d.cols);
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t j = 0; j < d.cols; ++j) m(i, j) = d(i, j);
  return m;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

std::vector<double> design_row(std::span<const double> x, std::span<const std::size_t> mask) {
  std::vector<double> row;
  row.reserve(mask.size() + 1);
  row.push_back(1.0);
  for (std::size_t j : mask) {
    if (j >= x.size()) {
      throw std::invalid_argument(fmt::format("mask index {} out of range", j));
    }
    row.push_back(x[j]);
  }
  return row;
}

LogisticFit fit_logistic(const DesignMatrix& design, std::span<const double> y01) {
  if (design.rows != y01.size() || design.rows == 0) {
    throw std::invalid_argument("logistic fit: design and response sizes differ");
  }
  const Eigen::MatrixXd X = to_eigen(design);
  const Eigen::Map<const Eigen::VectorXd> y(y01.data(), static_cast<Eigen::Index>(y01.size()));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  LogisticFit out;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      p(i) = expit(eta(i));
      w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
    }
    const Eigen::VectorXd score = X.transpose() * (y - p);
    out.iterations = it;
    out.max_abs_score = score.cwiseAbs().maxCoeff();
    if (out.max_abs_score < kScoreTolerance) break;
    const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    beta += info.ldlt().solve(score);
    if (!beta.allFinite() || beta.norm() > kSeparationNorm) {
      throw NumericalError(
          fmt::format("logistic fit diverged (|beta| = {}); the data look separable", beta.norm()));
    }
  }
  const Eigen::VectorXd eta = X * beta;
  bool saturated = true;
  for (Eigen::Index i = 0; i < eta.size() && saturated; ++i) {
    saturated = std::abs(y(i) - expit(eta(i))) < kSaturation;
  }
  if (saturated) {
    throw NumericalError("logistic fit reproduces every label exactly; the data are separable");
  }
  out.coef.assign(beta.data(), beta.data() + beta.size());
  return out;
}

MultinomialFit fit_multinomial(const DesignMatrix& design, std::span<const std::size_t> labels,
                               std::size_t n_categories, std::size_t reference,
                               double absent_prob_floor) {
  if (design.rows != labels.size() || design.rows == 0) {
    throw std::invalid_argument("multinomial fit: design and label sizes differ");
  }
  if (reference >= n_categories) {
    throw std::invalid_argument("reference category out of range");
  }
  std::vector<std::size_t> counts(n_categories, 0);
  for (std::size_t l : labels) {
    if (l >= n_categories) throw std::invalid_argument("label out of range");
    ++counts[l];
  }
  if (counts[reference] == 0) {
    throw std::invalid_argument("reference category absent from the data");
  }
  // Active non-reference categories get free coefficients.
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < n_categories; ++k) {
    if (k != reference && counts[k] > 0) active.push_back(k);
  }
  const std::size_t p = design.cols;
  const std::size_t m = active.size();
  const Eigen::MatrixXd X = to_eigen(design);
  const Eigen::Index dim = static_cast<Eigen::Index>(p * m);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(dim);

  MultinomialFit out;
  out.reference = reference;
  out.coef.assign(n_categories, std::vector<double>(p, 0.0));

  std::vector<double> probs(m);
  for (int it = 1; it <= kMaxIterations && m > 0; ++it) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < design.rows; ++i) {
      const auto xi = X.row(static_cast<Eigen::Index>(i));
      double denom = 1.0;
      double maxeta = 0.0;
      std::vector<double> eta(m);
      for (std::size_t k = 0; k < m; ++k) {
        eta[k] = xi.dot(beta.segment(static_cast<Eigen::Index>(k * p), static_cast<Eigen::Index>(p)));
        maxeta = std::max(maxeta, eta[k]);
      }
      denom = std::exp(-maxeta);
      for (std::size_t k = 0; k < m; ++k) denom += std::exp(eta[k] - maxeta);
      for (std::size_t k = 0; k < m; ++k) probs[k] = std::exp(eta[k] - maxeta) / denom;
      for (std::size_t k = 0; k < m; ++k) {
        const double yk = labels[i] == active[k] ? 1.0 : 0.0;
        score.segment(static_cast<Eigen::Index>(k * p), static_cast<Eigen::Index>(p)) +=
            (yk - probs[k]) * xi.transpose();
        for (std::size_t l = 0; l < m; ++l) {
          const double c = (k == l ? probs[k] : 0.0) - probs[k] * probs[l];
          info.block(static_cast<Eigen::Index>(k * p), static_cast<Eigen::Index>(l * p),
                     static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) +=
              c * xi.transpose() * xi;
        }
      }
    }
    out.iterations = it;
    if (score.cwiseAbs().maxCoeff() < kScoreTolerance) break;
    beta += info.ldlt().solve(score);
    if (!beta.allFinite() || beta.norm() > kSeparationNorm) {
      throw NumericalError(fmt::format("multinomial fit diverged (|beta| = {})", beta.norm()));
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < p; ++j) {
      out.coef[active[k]][j] = beta(static_cast<Eigen::Index>(k * p + j));
    }
  }
  for (std::size_t k = 0; k < n_categories; ++k) {
    if (k != reference && counts[k] == 0) {
      out.coef[k][0] = std::log(absent_prob_floor);
    }
  }
  return out;
}

std::vector<double> multinomial_probs(const MultinomialFit& fit, std::span<const double> row) {
  const std::size_t K = fit.coef.size();
  std::vector<double> eta(K);
  double maxeta = -INFINITY;
  for (std::size_t k = 0; k < K; ++k) {
    eta[k] = dot(fit.coef[k], row);
    maxeta = std::max(maxeta, eta[k]);
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    eta[k] = std::exp(eta[k] - maxeta);
    denom += eta[k];
  }
  for (double& v : eta) v /= denom;
  return eta;
}

LinearFit fit_ols(const DesignMatrix& design, std::span<const double> y) {
  if (design.rows != y.size()) {
    throw std::invalid_argument("OLS: design and response sizes differ");
  }
  if (design.rows <= design.cols) {
    throw NumericalError(fmt::format("OLS needs more than {} rows, got {}", design.cols, design.rows));
  }
  const Eigen::MatrixXd X = to_eigen(design);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    throw NumericalError("OLS design matrix is rank deficient");
  }
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - X * beta;
  LinearFit out;
  out.coef.assign(beta.data(), beta.data() + beta.size());
  out.residual_sd =
      std::sqrt(resid.squaredNorm() / static_cast<double>(design.rows - design.cols));
  if (!(out.residual_sd > 0.0)) {
    throw NumericalError("OLS residual standard deviation is zero");
  }
  return out;
}

}  // namespace otrsens
