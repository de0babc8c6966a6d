#include "otrsens/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "otrsens/numerics.hpp"
#include "otrsens/regression.hpp"

namespace otrsens {

double OutcomeCell::mean(std::span<const double> x) const {
  if (slope.size() != x.size()) {
    throw std::invalid_argument("outcome cell slope does not match covariate dimension");
  }
  return intercept + dot(slope, x);
}

void GenerativeConfig::validate() const {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("bridge parameter must lie in (0,1)");
  if (instrument_coef.size() != dim_x + 1) {
    throw std::invalid_argument("instrument coefficients must have dim_x + 1 entries");
  }
  for (const auto& s : strata) {
    if (s.bx.size() != dim_x) throw std::invalid_argument("stratum logit dimension mismatch");
  }
  for (const OutcomeCell* c : {&arm_minus, &arm_plus, &zm_a_plus, &zp_a_minus, &zp_a_zero, &zm_a_zero}) {
    if (!(c->sd > 0.0)) throw std::invalid_argument("outcome standard deviations must be positive");
    if (c->slope.size() != dim_x) throw std::invalid_argument("outcome slope dimension mismatch");
  }
  if (!(proposal_sd > 0.0)) throw std::invalid_argument("proposal sd must be positive");
  truth.validate(dim_x);
}

const OutcomeCell& GenerativeConfig::cell(int z, int a) const {
  if (a == z) return arm(z);
  if (z < 0) return a > 0 ? zm_a_plus : zm_a_zero;
  return a < 0 ? zp_a_minus : zp_a_zero;
}

double bridge_quantile(double phi, double p) {
  const double pi = std::numbers::pi;
  return std::log(std::sin(phi * pi * p) / std::sin(phi * pi * (1.0 - p))) / phi;
}

double sample_bridge(double phi, Rng& rng) {
  if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("bridge parameter must lie in (0,1)");
  return bridge_quantile(phi, rng.uniform());
}

double bridge_density(double phi, double u) {
  const double pi = std::numbers::pi;
  return std::sin(phi * pi) / (2.0 * pi * (std::cosh(phi * u) + std::cos(phi * pi)));
}

std::array<double, 6> stratum_probabilities(const GenerativeConfig& cfg, std::span<const double> x,
                                            int z, double u) {
  // Output order S1, S2, S3, S4, S5, S6; logits stored for S1, S2, S4, S5, S6.
  std::array<double, 6> eta{};
  constexpr std::array<std::size_t, 5> kSlot{0, 1, 3, 4, 5};
  for (std::size_t k = 0; k < 5; ++k) {
    const StratumLogit& s = cfg.strata[k];
    eta[kSlot[k]] = s.c0 + dot(s.bx, x) + s.bz * z + s.bu * u;
  }
  const double m = *std::max_element(eta.begin(), eta.end());
  double total = 0.0;
  for (double& e : eta) {
    e = std::exp(e - m);
    total += e;
  }
  for (double& e : eta) e /= total;
  return eta;
}

PrincipalStratum sample_stratum(const GenerativeConfig& cfg, std::span<const double> x, int z,
                                double u, Rng& rng) {
  const auto probs = stratum_probabilities(cfg, x, z, u);
  const std::size_t k = rng.categorical(probs);
  return principal_stratum(static_cast<Stratum>(k + 1));
}

int compliance_from_stratum(Stratum stratum, int z) {
  if (violates_monotonicity(stratum)) {
    throw std::invalid_argument(
        fmt::format("stratum {} is excluded under monotonicity", to_string(stratum)));
  }
  const PrincipalStratum ps = principal_stratum(stratum);
  return z > 0 ? ps.a_plus : ps.a_minus;
}

namespace {

double unnormalised_target(const GenerativeConfig& cfg, std::span<const double> x, int z, double y) {
  const OutcomeCell& arm = cfg.arm(z);
  return complier_weight(cfg.truth, z, z, x, y) * normal_pdf(y, arm.mean(x), arm.sd);
}

}  // namespace

double rejection_envelope(const GenerativeConfig& cfg, std::span<const double> x, int z) {
  double best = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double y = -10.0 + 0.01 * k;
    const double ratio =
        unnormalised_target(cfg, x, z, y) / normal_pdf(y, cfg.proposal_mean, cfg.proposal_sd);
    best = std::max(best, ratio);
  }
  if (!(best > 0.0) || !std::isfinite(best)) {
    throw NumericalError("rejection envelope is degenerate");
  }
  return 1.05 * best;
}

double acceptance_ratio(const GenerativeConfig& cfg, std::span<const double> x, int z, double y,
                        double envelope) {
  return unnormalised_target(cfg, x, z, y) /
         (envelope * normal_pdf(y, cfg.proposal_mean, cfg.proposal_sd));
}

double rejection_sample_complier_y(const GenerativeConfig& cfg, std::span<const double> x, int z,
                                   Rng& rng) {
  const double m = rejection_envelope(cfg, x, z);
  if (cfg.rejection_mode == RejectionMode::kMeanOfAccepted) {
    constexpr int kBatch = 8000;
    double sum = 0.0;
    int accepted = 0;
    for (int k = 0; k < kBatch; ++k) {
      const double y = rng.normal(cfg.proposal_mean, cfg.proposal_sd);
      if (rng.uniform() < acceptance_ratio(cfg, x, z, y, m)) {
        sum += y;
        ++accepted;
      }
    }
    if (accepted == 0) throw NumericalError("no proposal accepted in the batch");
    return sum / accepted;
  }
  constexpr long kCap = 1000000;
  for (long k = 0; k < kCap; ++k) {
    const double y = rng.normal(cfg.proposal_mean, cfg.proposal_sd);
    if (rng.uniform() < acceptance_ratio(cfg, x, z, y, m)) return y;
  }
  throw NumericalError("rejection sampler exceeded 1e6 proposals; the envelope is too loose");
}

double tilted_mean(const GenerativeConfig& cfg, std::span<const double> x, int z) {
  const GaussHermiteRule& rule = gauss_hermite(80);
  const OutcomeCell& arm = cfg.arm(z);
  const double mu = arm.mean(x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double y = mu + arm.sd * rule.nodes[k];
    const double w = rule.weights[k] * complier_weight(cfg.truth, z, z, x, y);
    num += w * y;
    den += w;
  }
  return num / den;
}

int optimal_action(const GenerativeConfig& cfg, std::span<const double> x) {
  return tilted_mean(cfg, x, 1) >= tilted_mean(cfg, x, -1) ? 1 : -1;
}

Trial generate_trial(const GenerativeConfig& cfg, std::uint64_t seed, std::uint64_t replicate) {
  cfg.validate();
  Rng rng(seed, replicate, Stream::kData);
  Rng complier_rng(seed, replicate, Stream::kComplierOutcome);
  std::vector<Observation> rows(cfg.n);
  Trial trial;
  trial.truth.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Observation& obs = rows[i];
    obs.x.resize(cfg.dim_x);
    for (double& v : obs.x) v = rng.uniform(-1.0, 1.0);
    obs.z = rng.sign_bernoulli(expit(cfg.instrument_coef[0] +
                                     dot(std::span(cfg.instrument_coef).subspan(1), obs.x)));
    TruthRecord& tr = trial.truth[i];
    tr.u = sample_bridge(cfg.phi, rng);
    const PrincipalStratum ps = sample_stratum(cfg, obs.x, obs.z, tr.u, rng);
    tr.stratum = ps.label;
    tr.a_minus = ps.a_minus;
    tr.a_plus = ps.a_plus;
    obs.a = compliance_from_stratum(ps.label, obs.z);
    if (ps.label == Stratum::kS4) {
      obs.y = rejection_sample_complier_y(cfg, obs.x, obs.z, complier_rng);
      ++trial.compliers;
    } else {
      const OutcomeCell& c = cfg.cell(obs.z, obs.a);
      obs.y = rng.normal(c.mean(obs.x), c.sd);
    }
    tr.optimal_action = optimal_action(cfg, obs.x);
  }
  trial.data = Dataset(std::move(rows), cfg.dim_x);
  return trial;
}

double true_complier_value(const LinearPolicy& policy, const GenerativeConfig& cfg, std::size_t n_mc,
                           Rng& rng, TruthPopulation population) {
  cfg.validate();
  if (n_mc == 0) throw std::invalid_argument("n_mc must be positive");
  std::vector<double> ys;
  ys.reserve(n_mc);
  std::vector<double> x(cfg.dim_x);
  while (ys.size() < n_mc) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    if (population == TruthPopulation::kCompliers) {
      const int z = rng.sign_bernoulli(
          expit(cfg.instrument_coef[0] + dot(std::span(cfg.instrument_coef).subspan(1), x)));
      const double u = sample_bridge(cfg.phi, rng);
      if (sample_stratum(cfg, x, z, u, rng).label != Stratum::kS4) continue;
    }
    ys.push_back(rejection_sample_complier_y(cfg, x, policy_decide(policy, x), rng));
  }
  return mean(ys);
}

TruthOracle::TruthOracle(const GenerativeConfig& cfg, std::size_t n_points, std::uint64_t seed,
                         TruthPopulation population) {
  cfg.validate();
  if (n_points == 0) throw std::invalid_argument("truth oracle needs at least one point");
  Rng rng(seed, 0, Stream::kTruth);
  xs_.resize(n_points, std::vector<double>(cfg.dim_x));
  weights_.resize(n_points, 1.0);
  means_.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    for (double& v : xs_[i]) v = rng.uniform(-1.0, 1.0);
    if (population == TruthPopulation::kCompliers) {
      // p(S4 | x) averaged over the instrument and the latent confounder.
      const double pz = expit(cfg.instrument_coef[0] + dot(std::span(cfg.instrument_coef).subspan(1), xs_[i]));
      // Midpoint rule on the bridge quantile scale integrates over u.
      double acc = 0.0;
      constexpr int kGrid = 400;
      for (int k = 0; k < kGrid; ++k) {
        const double u = bridge_quantile(cfg.phi, (k + 0.5) / kGrid);
        acc += pz * stratum_probabilities(cfg, xs_[i], 1, u)[3] +
               (1.0 - pz) * stratum_probabilities(cfg, xs_[i], -1, u)[3];
      }
      weights_[i] = acc / kGrid;
    }
    means_[i] = {tilted_mean(cfg, xs_[i], -1), tilted_mean(cfg, xs_[i], 1)};
  }
}

double TruthOracle::value(const LinearPolicy& policy) const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    num += weights_[i] * means_[i][arm_index(policy_decide(policy, xs_[i]))];
    den += weights_[i];
  }
  return num / den;
}

double TruthOracle::optimal_value() const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    num += weights_[i] * std::max(means_[i][0], means_[i][1]);
    den += weights_[i];
  }
  return num / den;
}

}  // namespace otrsens
