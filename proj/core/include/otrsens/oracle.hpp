#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "otrsens/model.hpp"
#include "otrsens/nuisance.hpp"
#include "otrsens/sensitivity.hpp"

namespace otrsens {

/// Parameters of a small enumerable world: X in {0, 1}, U in {u1, u2},
/// Y in {-1, +1}. Arrays indexed by x are [x], by arm are [arm_index(z)].
struct OracleSpec {
  std::array<double, 2> px{0.4, 0.6};
  std::array<double, 2> pz_plus{0.4, 0.65};
  std::array<double, 2> u_values{-1.0, 1.0};
  std::array<double, 2> pu{0.5, 0.5};
  /// p(S4 | u); the complier share does not depend on x so X is independent
  /// of the complier stratum.
  std::array<double, 2> p_s4{0.3, 0.5};
  /// Relative shares of S1, S2, S3, S5, S6 in the non-complier mass, [x][u].
  std::array<std::array<std::array<double, 5>, 2>, 2> other_shares{{
      {{{0.20, 0.25, 0.20, 0.15, 0.20}, {0.15, 0.30, 0.25, 0.10, 0.20}}},
      {{{0.25, 0.15, 0.20, 0.20, 0.20}, {0.10, 0.20, 0.30, 0.25, 0.15}}},
  }};
  /// p(Y = +1 | A = Z = z, x), [arm][x].
  std::array<std::array<double, 2>, 2> q_cell{{{0.45, 0.70}, {0.60, 0.35}}};
  /// Outcome slope of the true complier log-odds, [arm].
  std::array<double, 2> alpha_y{0.5, -0.5};
  /// p(Y = +1 | Z = z, A = a, x) for the four a != z cells:
  /// [0] (z=-1,a=+1), [1] (z=-1,a=0), [2] (z=+1,a=-1), [3] (z=+1,a=0); each [x].
  std::array<std::array<double, 2>, 4> q_other{{{0.7, 0.5}, {0.2, 0.3}, {0.4, 0.6}, {0.8, 0.55}}};
};

/// Bit flags selecting which exact nuisances are replaced by wrong values.
enum Corruption : unsigned {
  kCorruptNone = 0,
  kCorruptFz = 1u << 0,
  kCorruptFa = 1u << 1,
  kCorruptQ = 1u << 2,
  kCorruptKappa = 1u << 3,
};

/// Observed-data atom with its probability.
struct OracleAtom {
  Observation obs;
  double prob = 0.0;
};

/// A fully enumerable world in which the sensitivity model holds exactly
/// with a LINEAR_XY log-odds. Exposes the exact nuisances, the exact
/// complier value of any policy and exact expectations of per-row displays.
class DiscreteOracle {
 public:
  explicit DiscreteOracle(OracleSpec spec = {});

  const OracleSpec& spec() const { return spec_; }
  /// The true sensitivity parameters (LINEAR_XY, dim_x = 1).
  const SensitivityParams& truth() const { return truth_; }

  double p_s4() const;
  /// p(stratum | x) marginal over u; index 0..5 for S1..S6.
  std::array<double, 6> stratum_probs(int x) const;
  double instrument_prob(int z, double x) const;
  /// p(A = a | Z = z, x).
  double compliance_prob(int a, int z, int x) const;
  /// p(Y = +1 | Z = z, A = a, x).
  double outcome_p_plus(int z, int a, int x) const;
  /// p(Y(z) = +1 | S4, x).
  double complier_p_plus(int z, int x) const;

  /// Exact nuisances at covariate x with the requested corruption applied.
  RowNuisance nuisance(double x, unsigned corruption = kCorruptNone) const;
  NuisanceTable table(const Dataset& data, unsigned corruption = kCorruptNone) const;

  /// E[Y(pi(X)) | S4] computed from the latent stratum law.
  double complier_value(const LinearPolicy& policy) const;
  /// E[Delta(X) | S4].
  double complier_blip() const;

  const std::vector<OracleAtom>& atoms() const { return atoms_; }
  double total_mass() const;

  /// Exact expectation of f(obs, nuisance(obs.x)) over the observed law.
  double expectation(const std::function<double(const Observation&, const RowNuisance&)>& f,
                     unsigned corruption = kCorruptNone) const;

  Dataset sample(std::size_t n, std::uint64_t seed, std::uint64_t replicate) const;

  /// The four threshold policies (1,0), (-1,0), (-1,2), (1,-2).
  static std::vector<LinearPolicy> threshold_policies();

 private:
  int xi(double x) const;
  OracleSpec spec_;
  SensitivityParams truth_;
  std::vector<OracleAtom> atoms_;
};

}  // namespace otrsens
