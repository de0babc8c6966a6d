#include "otrsens/numerics.hpp"

#include <Eigen/Dense>
#include <map>
#include <mutex>

namespace otrsens {

namespace {

double pairwise_sum_impl(const double* data, std::size_t n) {
  constexpr std::size_t kBlock = 16;
  if (n <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += data[i];
    }
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

GaussHermiteRule build_rule(std::size_t order) {
  // Jacobi matrix of the probabilists' Hermite polynomials: off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order),
                                                 static_cast<Eigen::Index>(order));
  for (std::size_t k = 1; k < order; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    jacobi(i, i - 1) = std::sqrt(static_cast<double>(k));
    jacobi(i - 1, i) = jacobi(i, i - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t k = 0; k < order; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    rule.nodes[k] = solver.eigenvalues()(i);
    const double v = solver.eigenvectors()(0, i);
    rule.weights[k] = v * v;
  }
  return rule;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

double mean(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("mean of empty range");
  }
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double m = mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - m;
    sq[i] = d * d;
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(values.size() - 1));
}

const GaussHermiteRule& gauss_hermite(std::size_t order) {
  static std::mutex mutex;
  static std::map<std::size_t, GaussHermiteRule> cache;
  if (order == 0) {
    throw std::invalid_argument("Gauss-Hermite order must be positive");
  }
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, build_rule(order)).first;
  }
  return it->second;
}

}  // namespace otrsens
