#pragma once

#include <functional>
#include <span>
#include <vector>

#include "otrsens/model.hpp"
#include "otrsens/nuisance.hpp"
#include "otrsens/sensitivity.hpp"

namespace otrsens {

// Every estimator below returns the sample mean of a per-row display. When
// `contributions` is non-null it receives the centred per-row values, whose
// mean is zero and whose sample sd over sqrt(n) is the reported se.

/// Mean of W_i I{pi(X_i) = Z_i} with W the IPW weight.
EstimateWithSE ipw_value(const Dataset& data, const LinearPolicy& policy, const NuisanceTable& table,
                         const SensitivityParams& params, std::vector<double>* contributions = nullptr);

/// Per-row value of the efficient-influence display without its trailing
/// -V term:
///   T1 - T2 - T3 - T4 with
///   T1 = A(Z+A) Y w I{pi=Z} / (2 gamma fZ fA)
///   T2 = I{pi=Z} kappa(Z,X) / fZ - kappa'(X),  kappa'(X) = sum_z I{pi(X)=z} kappa(z,X)
///   T3 = A(A+Z) I{pi=Z} delta (w - gamma) / (2 gamma fZ fA)
///   T4 = A(Z+A) I{pi=Z} Q / (2 gamma fZ fA) - sum_a a(a+Z) I{pi=Z} Q(a,Z,X) / (2 gamma(a,Z,X) fZ)
double mr_value_row(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params,
                    int decision);

/// One-step estimator P_n of mr_value_row. Requires kappa in the table.
EstimateWithSE mr_value(const Dataset& data, const LinearPolicy& policy, const NuisanceTable& table,
                        const SensitivityParams& params, std::vector<double>* contributions = nullptr);

using InstrumentPropensity = std::function<double(int z, std::span<const double> x)>;

/// Three-term variant T1 - T3 - T4 with f(Z|X) replaced by a known
/// propensity; kappa is not used.
EstimateWithSE mr_value_known_fz(const Dataset& data, const LinearPolicy& policy,
                                 const NuisanceTable& table, const SensitivityParams& params,
                                 const InstrumentPropensity& true_fz,
                                 std::vector<double>* contributions = nullptr);

/// Convenience overload for a constant p(Z = +1).
EstimateWithSE mr_value_known_fz(const Dataset& data, const LinearPolicy& policy,
                                 const NuisanceTable& table, const SensitivityParams& params,
                                 double p_plus, std::vector<double>* contributions = nullptr);

/// Per-row display of psi_mr.
double psi_mr_row(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params);

/// Multiply robust average blip:
///   Z A(A+Z) / (2 gamma f(A,Z|X)) [Y w - Q - delta (w - gamma)] + Delta(X).
EstimateWithSE psi_mr(const Dataset& data, const NuisanceTable& table, const SensitivityParams& params,
                      std::vector<double>* contributions = nullptr);

}  // namespace otrsens
