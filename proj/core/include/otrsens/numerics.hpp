#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace otrsens {

/// Thrown when a numerical procedure fails (divergence, non-finite values,
/// unattainable targets). Precondition violations use std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double expit(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double normal_pdf(double x, double mean, double sd) {
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
  const double t = (x - mean) / sd;
  return kInvSqrt2Pi / sd * std::exp(-0.5 * t * t);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Pairwise (cascade) summation; the reduction order depends only on the
/// length of the input, so results are reproducible bit-for-bit.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

/// Sample standard deviation with n-1 denominator; 0 for fewer than 2 values.
double sample_sd(std::span<const double> values);

/// Gauss-Hermite rule for integrals against the standard normal density:
/// E[f(Z)] ~= sum_k weight[k] * f(node[k]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Probabilists' Gauss-Hermite rule with `order` nodes (Golub-Welsch).
/// Rules are cached per order.
const GaussHermiteRule& gauss_hermite(std::size_t order);

}  // namespace otrsens
