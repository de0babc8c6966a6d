#include "otrsens/policy_learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "otrsens/numerics.hpp"

namespace otrsens {

void LearnerConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(step_scale > 0.0)) throw std::invalid_argument("step scale must be positive");
  if (max_iter == 0) throw std::invalid_argument("max_iter must be positive");
}

namespace {

// Rows with nonzero weight, packed for the solver.
struct Problem {
  std::size_t n_total = 0;
  std::size_t dim = 0;
  std::vector<double> x;       // row-major, dim per row
  std::vector<double> weight;  // |W|
  std::vector<double> label;   // sign(W) * L
};

Problem make_problem(const Dataset& data, const WeightVector& weights,
                     const std::vector<std::size_t>* rows = nullptr) {
  if (weights.size() != data.size()) {
    throw std::invalid_argument("weights and data differ in size");
  }
  Problem p;
  p.dim = data.dim_x();
  auto add = [&](std::size_t i) {
    ++p.n_total;
    const double w = weights.values[i];
    if (!std::isfinite(w)) throw NumericalError("non-finite weight");
    if (w == 0.0 || weights.labels[i] == 0) return;
    p.x.insert(p.x.end(), data[i].x.begin(), data[i].x.end());
    p.weight.push_back(std::abs(w));
    p.label.push_back((w > 0.0 ? 1.0 : -1.0) * weights.labels[i]);
  };
  if (rows != nullptr) {
    for (std::size_t i : *rows) add(i);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) add(i);
  }
  return p;
}

double objective(const Problem& p, const std::vector<double>& theta, double lambda) {
  // theta = (beta0, beta...)
  double loss = 0.0;
  const std::size_t m = p.weight.size();
  for (std::size_t r = 0; r < m; ++r) {
    double g = theta[0];
    for (std::size_t j = 0; j < p.dim; ++j) g += theta[j + 1] * p.x[r * p.dim + j];
    loss += p.weight[r] * std::max(0.0, 1.0 - p.label[r] * g);
  }
  double ridge = 0.0;
  for (std::size_t j = 1; j < theta.size(); ++j) ridge += theta[j] * theta[j];
  return loss / static_cast<double>(p.n_total) + 0.5 * lambda * ridge;
}

LearnResult solve(const Problem& p, const LearnerConfig& cfg, double lambda) {
  if (p.weight.empty()) {
    throw std::invalid_argument("all weights are zero; nothing to learn");
  }
  const std::size_t d = p.dim + 1;
  const std::size_t m = p.weight.size();
  double mean_abs = 0.0;
  for (double w : p.weight) mean_abs += w;
  mean_abs /= static_cast<double>(p.n_total);

  std::vector<double> theta(d, 0.0);
  std::vector<double> avg(d, 0.0);
  std::vector<double> grad(d);
  std::vector<double> best = theta;
  double best_obj = objective(p, theta, lambda);
  double last_check = best_obj;
  const double inv_n = 1.0 / static_cast<double>(p.n_total);

  std::size_t t = 1;
  for (; t <= cfg.max_iter; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double* xr = p.x.data() + r * p.dim;
      double g = theta[0];
      for (std::size_t j = 0; j < p.dim; ++j) g += theta[j + 1] * xr[j];
      const double margin = 1.0 - p.label[r] * g;
      if (margin > 0.0) {
        loss += p.weight[r] * margin;
        const double c = p.weight[r] * p.label[r] * inv_n;
        grad[0] -= c;
        for (std::size_t j = 0; j < p.dim; ++j) grad[j + 1] -= c * xr[j];
      }
    }
    double ridge = 0.0;
    for (std::size_t j = 1; j < d; ++j) ridge += theta[j] * theta[j];
    const double current = loss * inv_n + 0.5 * lambda * ridge;
    if (!std::isfinite(current)) throw NumericalError("hinge objective became non-finite");
    if (current < best_obj) {
      best_obj = current;
      best = theta;
    }
    const double step = cfg.step_scale / (std::sqrt(static_cast<double>(t)) * mean_abs);
    // The ridge term is applied implicitly so large penalties cannot overshoot.
    const double shrink = 1.0 / (1.0 + step * lambda);
    theta[0] -= step * grad[0];
    for (std::size_t j = 1; j < d; ++j) theta[j] = (theta[j] - step * grad[j]) * shrink;
    const double k = static_cast<double>(t);
    for (std::size_t j = 0; j < d; ++j) avg[j] += (theta[j] - avg[j]) / k;

    if (t % 50 == 0) {
      const double avg_obj = objective(p, avg, lambda);
      const double now = std::min(avg_obj, best_obj);
      if (last_check - now < cfg.tolerance * std::max(1e-12, std::abs(last_check))) break;
      last_check = now;
    }
  }
  const double avg_obj = objective(p, avg, lambda);
  LearnResult out;
  const std::vector<double>& chosen = avg_obj <= best_obj ? avg : best;
  out.objective = std::min(avg_obj, best_obj);
  out.iterations = std::min(t, cfg.max_iter);
  out.policy.beta0 = chosen[0];
  out.policy.beta.assign(chosen.begin() + 1, chosen.end());
  return out;
}

}  // namespace

double hinge_objective(const Dataset& data, const WeightVector& weights, const LinearPolicy& policy,
                       double lambda) {
  if (policy.beta.size() != data.dim_x()) {
    throw std::invalid_argument("policy dimension does not match the data");
  }
  const Problem p = make_problem(data, weights);
  std::vector<double> theta{policy.beta0};
  theta.insert(theta.end(), policy.beta.begin(), policy.beta.end());
  return objective(p, theta, lambda);
}

LearnResult learn_policy_detailed(const Dataset& data, const WeightVector& weights,
                                  const LearnerConfig& cfg) {
  cfg.validate();
  return solve(make_problem(data, weights), cfg, cfg.lambda);
}

LinearPolicy learn_policy(const Dataset& data, const WeightVector& weights, const LearnerConfig& cfg) {
  return learn_policy_detailed(data, weights, cfg).policy;
}

double cv_agreement(const Dataset& data, const WeightVector& weights, const LearnerConfig& cfg,
                    double lambda) {
  if (cfg.cv_folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  double score = 0.0;
  for (std::size_t k = 0; k < cfg.cv_folds; ++k) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < data.size(); ++i) (i % cfg.cv_folds == k ? test : train).push_back(i);
    const Problem p = make_problem(data, weights, &train);
    if (p.weight.empty()) continue;
    const LinearPolicy pol = solve(p, cfg, lambda).policy;
    for (std::size_t i : test) {
      const double w = weights.values[i];
      if (w == 0.0) continue;
      const int target = (w > 0.0 ? 1 : -1) * weights.labels[i];
      score += policy_decide(pol, data[i].x) == target ? std::abs(w) : 0.0;
    }
  }
  return score;
}

double select_lambda(const Dataset& data, const WeightVector& weights, const LearnerConfig& cfg) {
  if (cfg.lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
  std::vector<double> grid = cfg.lambda_grid;
  std::sort(grid.begin(), grid.end());
  for (double l : grid) {
    if (!(l > 0.0)) throw std::invalid_argument("lambda grid values must be positive");
  }
  if (grid.size() == 1) return grid.front();
  double best_lambda = grid.front();
  double best_score = -1.0;
  for (double l : grid) {
    const double s = cv_agreement(data, weights, cfg, l);
    if (s > best_score) {
      best_score = s;
      best_lambda = l;
    }
  }
  return best_lambda;
}

std::string policy_to_json(const LinearPolicy& policy) {
  nlohmann::json j;
  j["beta0"] = policy.beta0;
  j["beta"] = policy.beta;
  return j.dump();
}

LinearPolicy policy_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  LinearPolicy p;
  p.beta0 = j.at("beta0").get<double>();
  p.beta = j.at("beta").get<std::vector<double>>();
  return p;
}

}  // namespace otrsens
