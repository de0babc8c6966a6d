#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "otrsens/model.hpp"
#include "otrsens/rng.hpp"
#include "otrsens/sensitivity.hpp"

namespace otrsens {

/// Log-odds of one stratum against S3: c0 + bx'x + bz*z + bu*u.
struct StratumLogit {
  double c0 = 0.0;
  std::vector<double> bx;
  double bz = 0.0;
  double bu = 0.0;
};

/// Normal outcome law N(intercept + slope'x, sd^2).
struct OutcomeCell {
  double intercept = 0.0;
  std::vector<double> slope;
  double sd = 1.0;

  double mean(std::span<const double> x) const;
};

enum class RejectionMode {
  kFirstAccept,     // standard rejection sampling
  kMeanOfAccepted,  // literal variant: mean of the accepted draws out of a fixed batch
};

struct GenerativeConfig {
  std::size_t n = 500;
  std::size_t dim_x = 2;
  SensitivityParams truth = SensitivityParams::y_only(0.5, 0.5);
  double phi = 0.5;
  std::vector<double> instrument_coef{0.3, -2.0, 2.0};  // (intercept, x1, x2)
  /// Logits for S1, S2, S4, S5, S6 in that order; S3 is the reference.
  std::array<StratumLogit, 5> strata{
      StratumLogit{0.0, {0.5, 0.0}, 0.5, 1.0}, StratumLogit{0.0, {-0.5, 0.0}, 0.5, 1.0},
      StratumLogit{0.0, {-0.5, 0.0}, 0.5, -1.0}, StratumLogit{0.0, {0.5, 0.0}, 0.5, -1.0},
      StratumLogit{0.0, {0.5, 0.0}, 0.5, -1.0}};
  OutcomeCell arm_minus{1.0, {2.0, 2.0}, 0.5};     // A = Z = -1
  OutcomeCell arm_plus{1.0, {0.0, 0.0}, 0.5};      // A = Z = +1
  OutcomeCell zm_a_plus{3.0, {1.0, 1.0}, 0.5};     // Z = -1, A = +1
  OutcomeCell zp_a_minus{-1.0, {1.0, 1.0}, 0.5};   // Z = +1, A = -1
  OutcomeCell zp_a_zero{5.0, {0.0, 0.0}, 0.1};     // Z = +1, A = 0
  OutcomeCell zm_a_zero{-5.0, {0.0, 0.0}, 0.1};    // Z = -1, A = 0
  double proposal_mean = 1.5;
  double proposal_sd = 2.0;
  RejectionMode rejection_mode = RejectionMode::kFirstAccept;

  void validate() const;
  const OutcomeCell& arm(int z) const { return z > 0 ? arm_plus : arm_minus; }
  const OutcomeCell& cell(int z, int a) const;
};

struct TruthRecord {
  Stratum stratum = Stratum::kS3;
  double u = 0.0;
  int a_minus = 0;
  int a_plus = 0;
  int optimal_action = 1;
};

struct Trial {
  Dataset data;
  std::vector<TruthRecord> truth;
  std::size_t compliers = 0;
};

/// Inverse-CDF draw from the bridge distribution with parameter phi.
double bridge_quantile(double phi, double p);
double sample_bridge(double phi, Rng& rng);
double bridge_density(double phi, double u);

/// Softmax probabilities of S1..S6 (index 0..5) at (x, z, u).
std::array<double, 6> stratum_probabilities(const GenerativeConfig& cfg, std::span<const double> x,
                                            int z, double u);
PrincipalStratum sample_stratum(const GenerativeConfig& cfg, std::span<const double> x, int z,
                                double u, Rng& rng);

/// Table 1 lookup of A(z). Throws std::invalid_argument for S7-S9.
int compliance_from_stratum(Stratum stratum, int z);

/// Envelope constant: 1.05 times the maximum over a 2001-point grid on
/// [-10, 10] of w(y) f_z(y|x) / proposal(y).
double rejection_envelope(const GenerativeConfig& cfg, std::span<const double> x, int z);

/// Acceptance probability of a proposal y given the envelope.
double acceptance_ratio(const GenerativeConfig& cfg, std::span<const double> x, int z, double y,
                        double envelope);

/// Draw from the complier outcome density w f_z / gamma. Throws
/// NumericalError after 1e6 rejected proposals.
double rejection_sample_complier_y(const GenerativeConfig& cfg, std::span<const double> x, int z,
                                   Rng& rng);

/// Mean of Y(z) among compliers at x, by Gauss-Hermite quadrature.
double tilted_mean(const GenerativeConfig& cfg, std::span<const double> x, int z);

/// Optimal arm for compliers at x: sign(m(+1) - m(-1)), ties to +1.
int optimal_action(const GenerativeConfig& cfg, std::span<const double> x);

Trial generate_trial(const GenerativeConfig& cfg, std::uint64_t seed, std::uint64_t replicate);

enum class TruthPopulation {
  kCovariateMarginal,  // E_X[ m_{pi(X)}(X) ], the identified estimand
  kCompliers,          // E[ Y(pi(X)) | S4 ] with S4 drawn from the stratum model
};

/// Monte-Carlo value of `policy` from n_mc simulated complier outcomes drawn
/// by rejection sampling.
double true_complier_value(const LinearPolicy& policy, const GenerativeConfig& cfg, std::size_t n_mc,
                           Rng& rng, TruthPopulation population = TruthPopulation::kCovariateMarginal);

/// Rao-Blackwellised truth: tilted means precomputed on a fixed covariate
/// sample, so a policy's value is an average of m_{pi(x)}(x).
class TruthOracle {
 public:
  TruthOracle(const GenerativeConfig& cfg, std::size_t n_points, std::uint64_t seed,
              TruthPopulation population = TruthPopulation::kCovariateMarginal);

  double value(const LinearPolicy& policy) const;
  double optimal_value() const;
  std::size_t size() const { return xs_.size(); }

 private:
  std::vector<std::vector<double>> xs_;
  std::vector<double> weights_;
  std::vector<std::array<double, 2>> means_;
};

}  // namespace otrsens
