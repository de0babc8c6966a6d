#include "otrsens/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "otrsens/datagen.hpp"
#include "otrsens/numerics.hpp"
#include "otrsens/rng.hpp"

namespace otrsens {
namespace {

// Stratum index 0..5 for S1..S6; shares are stored for S1, S2, S3, S5, S6.
constexpr std::array<std::size_t, 5> kOtherSlot{0, 1, 2, 4, 5};

std::array<double, 6> strata_given_xu(const OracleSpec& s, int x, int u) {
  std::array<double, 6> p{};
  const auto& shares = s.other_shares[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
  double total = 0.0;
  for (double v : shares) total += v;
  const double rest = 1.0 - s.p_s4[static_cast<std::size_t>(u)];
  for (std::size_t k = 0; k < 5; ++k) p[kOtherSlot[k]] = rest * shares[k] / total;
  p[3] = s.p_s4[static_cast<std::size_t>(u)];
  return p;
}

int compliance_from_stratum_index(std::size_t k, int z) {
  return compliance_from_stratum(static_cast<Stratum>(k + 1), z);
}

std::size_t other_cell(int z, int a) {
  if (z < 0) return a > 0 ? 0 : 1;
  return a < 0 ? 2 : 3;
}

}  // namespace

DiscreteOracle::DiscreteOracle(OracleSpec spec) : spec_(spec) {
  truth_.form = SensitivityForm::kLinearXY;
  // For each arm, choose the intercept at each x so that
  // E[expit(a0(x) + aY y) | A = Z = z, x] = p(S4 | A = Z = z, x).
  for (int z : {-1, 1}) {
    const std::size_t k = arm_index(z);
    std::array<double, 2> a0{};
    for (int x = 0; x < 2; ++x) {
      const double c = p_s4() / compliance_prob(z, z, x);
      if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("oracle complier share within the A = Z cell must lie in (0,1)");
      }
      const double q = spec_.q_cell[k][static_cast<std::size_t>(x)];
      const std::array<double, 2> support{-1.0, 1.0};
      const std::array<double, 2> pmf{1.0 - q, q};
      a0[static_cast<std::size_t>(x)] = solve_alpha0_discrete(c, support, pmf, spec_.alpha_y[k]);
    }
    ArmAlpha& arm = truth_.arm(z);
    arm.a0 = a0[0];
    arm.aX = {a0[1] - a0[0]};
    arm.aY = spec_.alpha_y[k];
  }

  for (int x = 0; x < 2; ++x) {
    for (int z : {-1, 1}) {
      for (int a = -1; a <= 1; ++a) {
        const double pa = compliance_prob(a, z, x);
        if (pa <= 0.0) continue;
        const double py = outcome_p_plus(z, a, x);
        for (double y : {-1.0, 1.0}) {
          OracleAtom atom;
          atom.obs.x = {static_cast<double>(x)};
          atom.obs.z = z;
          atom.obs.a = a;
          atom.obs.y = y;
          atom.prob = spec_.px[static_cast<std::size_t>(x)] * instrument_prob(z, x) * pa *
                      (y > 0 ? py : 1.0 - py);
          atoms_.push_back(std::move(atom));
        }
      }
    }
  }
}

int DiscreteOracle::xi(double x) const {
  if (x == 0.0) return 0;
  if (x == 1.0) return 1;
  throw std::invalid_argument(fmt::format("oracle covariate must be 0 or 1, got {}", x));
}

double DiscreteOracle::p_s4() const {
  return spec_.pu[0] * spec_.p_s4[0] + spec_.pu[1] * spec_.p_s4[1];
}

std::array<double, 6> DiscreteOracle::stratum_probs(int x) const {
  std::array<double, 6> out{};
  for (int u = 0; u < 2; ++u) {
    const auto p = strata_given_xu(spec_, x, u);
    for (std::size_t k = 0; k < 6; ++k) out[k] += spec_.pu[static_cast<std::size_t>(u)] * p[k];
  }
  return out;
}

double DiscreteOracle::instrument_prob(int z, double x) const {
  const double p = spec_.pz_plus[static_cast<std::size_t>(xi(x))];
  return z > 0 ? p : 1.0 - p;
}

double DiscreteOracle::compliance_prob(int a, int z, int x) const {
  const auto p = stratum_probs(x);
  double total = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    if (compliance_from_stratum_index(k, z) == a) total += p[k];
  }
  return total;
}

double DiscreteOracle::outcome_p_plus(int z, int a, int x) const {
  const auto xs = static_cast<std::size_t>(x);
  if (a == z) return spec_.q_cell[arm_index(z)][xs];
  return spec_.q_other[other_cell(z, a)][xs];
}

double DiscreteOracle::complier_p_plus(int z, int x) const {
  const double c = p_s4() / compliance_prob(z, z, x);
  const double q = spec_.q_cell[arm_index(z)][static_cast<std::size_t>(x)];
  const std::array<double, 1> xv{static_cast<double>(x)};
  return complier_weight(truth_, z, z, xv, 1.0) * q / c;
}

RowNuisance DiscreteOracle::nuisance(double x, unsigned corruption) const {
  const int xv = xi(x);
  const std::array<double, 1> xs{x};
  RowNuisance nu;
  for (int z : {-1, 1}) {
    const std::size_t k = arm_index(z);
    const double q = spec_.q_cell[k][static_cast<std::size_t>(xv)];
    const double w_plus = complier_weight(truth_, z, z, xs, 1.0);
    const double w_minus = complier_weight(truth_, z, z, xs, -1.0);
    nu.fz[k] = instrument_prob(z, x);
    nu.fa[k] = compliance_prob(z, z, xv);
    nu.gamma[k] = q * w_plus + (1.0 - q) * w_minus;
    nu.q[k] = q * w_plus - (1.0 - q) * w_minus;
    nu.kappa[k] = nu.q[k] / nu.gamma[k];
  }
  if (corruption & kCorruptFz) {
    const double p_plus = 0.55 - 0.3 * x;
    nu.fz = {1.0 - p_plus, p_plus};
  }
  if (corruption & kCorruptFa) {
    for (double& v : nu.fa) v = std::min(0.95, v * (0.7 + 0.5 * x));
  }
  if (corruption & kCorruptQ) {
    nu.q[0] += 0.15 + 0.1 * x;
    nu.q[1] -= 0.2 - 0.05 * x;
  }
  if (corruption & kCorruptKappa) {
    nu.kappa[0] += 0.3 - 0.2 * x;
    nu.kappa[1] -= 0.25 + 0.1 * x;
  }
  return nu;
}

NuisanceTable DiscreteOracle::table(const Dataset& data, unsigned corruption) const {
  NuisanceTable t;
  t.rows.reserve(data.size());
  for (const auto& row : data) {
    if (row.x.size() != 1) throw std::invalid_argument("oracle data has one covariate");
    t.rows.push_back(nuisance(row.x[0], corruption));
  }
  t.has_kappa = true;
  return t;
}

double DiscreteOracle::complier_value(const LinearPolicy& policy) const {
  // p(x | S4) from the latent law, then the complier outcome law at pi(x).
  double num = 0.0;
  double den = 0.0;
  for (int x = 0; x < 2; ++x) {
    const double joint = spec_.px[static_cast<std::size_t>(x)] * stratum_probs(x)[3];
    const std::array<double, 1> xv{static_cast<double>(x)};
    const int z = policy_decide(policy, xv);
    num += joint * (2.0 * complier_p_plus(z, x) - 1.0);
    den += joint;
  }
  return num / den;
}

double DiscreteOracle::complier_blip() const {
  double num = 0.0;
  double den = 0.0;
  for (int x = 0; x < 2; ++x) {
    const double joint = spec_.px[static_cast<std::size_t>(x)] * stratum_probs(x)[3];
    num += joint * 2.0 * (complier_p_plus(1, x) - complier_p_plus(-1, x));
    den += joint;
  }
  return num / den;
}

double DiscreteOracle::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.prob;
  return s;
}

double DiscreteOracle::expectation(
    const std::function<double(const Observation&, const RowNuisance&)>& f,
    unsigned corruption) const {
  const std::array<RowNuisance, 2> nus{nuisance(0.0, corruption), nuisance(1.0, corruption)};
  double s = 0.0;
  for (const auto& atom : atoms_) {
    s += atom.prob * f(atom.obs, nus[static_cast<std::size_t>(xi(atom.obs.x[0]))]);
  }
  return s;
}

Dataset DiscreteOracle::sample(std::size_t n, std::uint64_t seed, std::uint64_t replicate) const {
  Rng rng(seed, replicate, Stream::kData);
  std::vector<Observation> rows(n);
  for (auto& obs : rows) {
    const int x = rng.uniform() < spec_.px[1] ? 1 : 0;
    const int u = rng.uniform() < spec_.pu[1] ? 1 : 0;
    const auto strata = strata_given_xu(spec_, x, u);
    const std::size_t s = rng.categorical(strata);
    obs.x = {static_cast<double>(x)};
    obs.z = rng.sign_bernoulli(spec_.pz_plus[static_cast<std::size_t>(x)]);
    obs.a = compliance_from_stratum_index(s, obs.z);
    double p_plus = 0.0;
    if (obs.a == obs.z) {
      const double c = p_s4() / compliance_prob(obs.z, obs.z, x);
      const double q = spec_.q_cell[arm_index(obs.z)][static_cast<std::size_t>(x)];
      const double w = complier_weight(truth_, obs.z, obs.z, obs.x, 1.0);
      p_plus = s == 3 ? w * q / c : (1.0 - w) * q / (1.0 - c);
    } else {
      p_plus = spec_.q_other[other_cell(obs.z, obs.a)][static_cast<std::size_t>(x)];
    }
    obs.y = rng.uniform() < p_plus ? 1.0 : -1.0;
  }
  return Dataset(std::move(rows), 1);
}

std::vector<LinearPolicy> DiscreteOracle::threshold_policies() {
  return {LinearPolicy{1.0, {0.0}}, LinearPolicy{-1.0, {0.0}}, LinearPolicy{-1.0, {2.0}},
          LinearPolicy{1.0, {-2.0}}};
}

}  // namespace otrsens
