#include "otrsens/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include <fmt/format.h>

#include "otrsens/numerics.hpp"

namespace otrsens {

std::string_view to_string(SensitivityForm form) {
  switch (form) {
    case SensitivityForm::kYOnly: return "Y_ONLY";
    case SensitivityForm::kLinearXY: return "LINEAR_XY";
    case SensitivityForm::kPca1: return "PCA1";
  }
  return "?";
}

SensitivityForm sensitivity_form_from_string(std::string_view name) {
  if (name == "Y_ONLY") return SensitivityForm::kYOnly;
  if (name == "LINEAR_XY") return SensitivityForm::kLinearXY;
  if (name == "PCA1") return SensitivityForm::kPca1;
  throw std::invalid_argument(fmt::format("unknown sensitivity form '{}'", name));
}

SensitivityParams SensitivityParams::y_only(double a_y_minus, double a_y_plus, double a0_minus,
                                            double a0_plus) {
  SensitivityParams p;
  p.form = SensitivityForm::kYOnly;
  p.minus.a0 = a0_minus;
  p.minus.aY = a_y_minus;
  p.plus.a0 = a0_plus;
  p.plus.aY = a_y_plus;
  return p;
}

void SensitivityParams::validate(std::size_t dim_x) const {
  for (const ArmAlpha* arm : {&minus, &plus}) {
    switch (form) {
      case SensitivityForm::kYOnly:
        if (!arm->aX.empty()) {
          throw std::invalid_argument("Y_ONLY sensitivity form takes no covariate coefficients");
        }
        break;
      case SensitivityForm::kLinearXY:
        if (arm->aX.size() != dim_x) {
          throw std::invalid_argument(fmt::format(
              "LINEAR_XY needs {} covariate coefficients, got {}", dim_x, arm->aX.size()));
        }
        break;
      case SensitivityForm::kPca1:
        if (pca && pca->loading.size() != dim_x + 1) {
          throw std::invalid_argument("PCA loading dimension does not match the data");
        }
        break;
    }
  }
}

double sensitivity_score(const SensitivityParams& params, int z, std::span<const double> x,
                         double y) {
  const ArmAlpha& arm = params.arm(z);
  switch (params.form) {
    case SensitivityForm::kYOnly:
      return arm.a0 + arm.aY * y;
    case SensitivityForm::kLinearXY: {
      if (arm.aX.size() != x.size()) {
        throw std::invalid_argument("covariate dimension does not match alphaX");
      }
      double g = arm.a0 + arm.aY * y;
      for (std::size_t j = 0; j < x.size(); ++j) {
        g += arm.aX[j] * x[j];
      }
      return g;
    }
    case SensitivityForm::kPca1: {
      if (!params.pca) {
        throw std::invalid_argument("PCA1 sensitivity form used before fitting the loading");
      }
      const PcaLoading& pca = *params.pca;
      if (pca.loading.size() != x.size() + 1) {
        throw std::invalid_argument("PCA loading dimension does not match the covariates");
      }
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        s += pca.loading[j] * (x[j] - pca.center[j]) / pca.scale[j];
      }
      const std::size_t k = x.size();
      s += pca.loading[k] * (y - pca.center[k]) / pca.scale[k];
      return arm.a0 + arm.a_pca * s;
    }
  }
  throw std::invalid_argument("unknown sensitivity form");
}

double complier_weight(const SensitivityParams& params, int a, int z, std::span<const double> x,
                       double y) {
  if (z != 1 && z != -1) {
    throw std::invalid_argument("instrument must be -1 or +1");
  }
  if (a < -1 || a > 1) {
    throw std::invalid_argument("compliance must be in {-1,0,1}");
  }
  if (a != z) {
    return 0.0;
  }
  return expit(sensitivity_score(params, z, x, y));
}

double gamma_mc(const SensitivityParams& params, int a, int z, std::span<const double> x,
                const OutcomeSampler& sampler, std::size_t n_mc, Rng& rng) {
  if (n_mc == 0) {
    throw std::invalid_argument("gamma_mc needs at least one draw");
  }
  if (a != z) {
    throw std::invalid_argument("gamma is only defined on the A = Z event");
  }
  std::vector<double> w(n_mc);
  for (std::size_t j = 0; j < n_mc; ++j) {
    const double y = sampler(rng);
    if (!std::isfinite(y)) {
      throw NumericalError("outcome sampler returned a non-finite draw");
    }
    w[j] = complier_weight(params, a, z, x, y);
  }
  return mean(w);
}

namespace {

double checked_target(double p_s4, double p_comply_z) {
  if (!(p_s4 > 0.0) || !(p_s4 <= p_comply_z) || !(p_comply_z <= 1.0)) {
    throw std::invalid_argument(fmt::format(
        "need 0 < p_s4 <= p_comply <= 1, got p_s4={} p_comply={}", p_s4, p_comply_z));
  }
  return p_s4 / p_comply_z;
}

// Bisection on a function increasing in alpha0.
template <typename F>
double bisect_increasing(F&& f, double target) {
  double lo = -50.0;
  double hi = 50.0;
  if (f(lo) > target || f(hi) < target) {
    throw NumericalError(fmt::format(
        "target complier probability {} is outside the attainable range [{}, {}]", target, f(lo),
        f(hi)));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double solve_alpha0(double p_s4, double p_comply_z, BinaryOutcome outcome, double alpha_y) {
  const double t = checked_target(p_s4, p_comply_z);
  const double p_plus = outcome.p_plus;
  const double p_minus = 1.0 - p_plus;
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) {
    throw std::invalid_argument("p(Y=+1) must be a probability");
  }
  if (t >= 1.0) {
    throw NumericalError("complier probability of 1 requires an infinite intercept");
  }
  const double ep = std::exp(alpha_y);
  const double em = std::exp(-alpha_y);
  const double qa = t;
  const double qb = t * em + t * ep - p_minus * em - p_plus * ep;
  const double qc = t - p_plus - p_minus;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) {
    throw NumericalError(fmt::format("no real root for the intercept (discriminant {})", disc));
  }
  auto residual = [&](double a0) {
    return p_plus * expit(a0 + alpha_y) + p_minus * expit(a0 - alpha_y) - t;
  };
  const double sq = std::sqrt(disc);
  std::vector<double> valid;
  for (double r : {(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)}) {
    if (r > 0.0) {
      const double a0 = -std::log(r);
      if (std::abs(residual(a0)) < 1e-8) {
        valid.push_back(a0);
      }
    }
  }
  if (valid.empty()) {
    throw NumericalError(fmt::format(
        "no root of the intercept equation reproduces complier probability {}", t));
  }
  if (valid.size() == 2) {
    std::clog << fmt::format("warning: two valid intercepts ({}, {}); using the larger\n",
                             valid[0], valid[1]);
  }
  return *std::max_element(valid.begin(), valid.end());
}

double solve_alpha0(double p_s4, double p_comply_z, std::span<const double> outcome_draws,
                    double alpha_y) {
  const double t = checked_target(p_s4, p_comply_z);
  if (outcome_draws.empty()) {
    throw std::invalid_argument("need at least one outcome draw");
  }
  std::vector<double> w(outcome_draws.size());
  auto f = [&](double a0) {
    for (std::size_t j = 0; j < outcome_draws.size(); ++j) {
      w[j] = expit(a0 + alpha_y * outcome_draws[j]);
    }
    return mean(w);
  };
  return bisect_increasing(f, t);
}

double solve_alpha0_discrete(double target, std::span<const double> support,
                             std::span<const double> pmf, double alpha_y) {
  if (support.size() != pmf.size() || support.empty()) {
    throw std::invalid_argument("support and pmf must be nonempty and of equal length");
  }
  if (!(target > 0.0 && target < 1.0)) {
    throw std::invalid_argument("target complier probability must lie in (0,1)");
  }
  auto f = [&](double a0) {
    double s = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
      s += pmf[j] * expit(a0 + alpha_y * support[j]);
    }
    return s;
  };
  return bisect_increasing(f, target);
}

namespace {

// Cyclic Jacobi eigenvalue iteration for a small symmetric matrix stored
// row-major. Returns the eigenvector of the largest eigenvalue.
std::vector<double> leading_eigenvector(std::vector<double> a, std::size_t p) {
  std::vector<double> v(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) v[i * p + i] = 1.0;
  auto at = [p](std::vector<double>& m, std::size_t i, std::size_t j) -> double& {
    return m[i * p + j];
  };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) off += at(a, i, j) * at(a, i, j);
    if (off < 1e-30) break;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        const double aij = at(a, i, j);
        if (std::abs(aij) < 1e-300) continue;
        const double theta = (at(a, j, j) - at(a, i, i)) / (2.0 * aij);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < p; ++k) {
          const double aki = at(a, k, i);
          const double akj = at(a, k, j);
          at(a, k, i) = c * aki - s * akj;
          at(a, k, j) = s * aki + c * akj;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double aik = at(a, i, k);
          const double ajk = at(a, j, k);
          at(a, i, k) = c * aik - s * ajk;
          at(a, j, k) = s * aik + c * ajk;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double vki = at(v, k, i);
          const double vkj = at(v, k, j);
          at(v, k, i) = c * vki - s * vkj;
          at(v, k, j) = s * vki + c * vkj;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < p; ++i) {
    if (at(a, i, i) > at(a, best, best)) best = i;
  }
  std::vector<double> out(p);
  for (std::size_t k = 0; k < p; ++k) out[k] = at(v, k, best);
  return out;
}

}  // namespace

PcaLoading fit_pca1(const Dataset& data) {
  const std::size_t p = data.dim_x() + 1;
  const std::size_t n = data.size();
  if (n < data.dim_x() + 2) {
    throw std::invalid_argument(fmt::format("PCA needs at least {} rows, got {}", p + 1, n));
  }
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j + 1 < p; ++j) cols[j][i] = data[i].x[j];
    cols[p - 1][i] = data[i].y;
  }
  PcaLoading out;
  out.center.resize(p);
  out.scale.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    out.center[j] = mean(cols[j]);
    out.scale[j] = sample_sd(cols[j]);
    if (!(out.scale[j] > 0.0)) {
      throw NumericalError(fmt::format("column {} has zero variance", j));
    }
    for (double& v : cols[j]) v = (v - out.center[j]) / out.scale[j];
  }
  std::vector<double> corr(p * p);
  std::vector<double> prod(n);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      for (std::size_t i = 0; i < n; ++i) prod[i] = cols[a][i] * cols[b][i];
      corr[a * p + b] = corr[b * p + a] = pairwise_sum(prod) / static_cast<double>(n - 1);
    }
  }
  out.loading = leading_eigenvector(std::move(corr), p);
  double norm = 0.0;
  for (double v : out.loading) norm += v * v;
  norm = std::sqrt(norm);
  const double sign = out.loading[p - 1] < 0.0 ? -1.0 : 1.0;
  for (double& v : out.loading) v *= sign / norm;
  return out;
}

}  // namespace otrsens
