#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "otrsens/model.hpp"
#include "otrsens/nuisance.hpp"
#include "otrsens/sensitivity.hpp"

namespace otrsens {

/// Per-row classification weights with the label each weight refers to
/// (the instrument for IPW, MR and OWL; the compliance value for IVT).
struct WeightVector {
  std::vector<double> values;
  std::vector<int> labels;
  Method method = Method::kIpw;
  std::size_t clipped = 0;
  double zero_fraction = 0.0;

  std::size_t size() const { return values.size(); }
};

/// A(A+Z) Y w / (2 gamma f(A|Z,X) f(Z|X)).
double ipw_weight(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params);

/// Delta(x) = delta(1,1,x) - delta(-1,-1,x).
double blip(const RowNuisance& nu);

/// A(A+Z) / (2 gamma f(A,Z|X)) [Y w - Q - delta (w - gamma)] + Z Delta(X).
double mr_weight(const Observation& obs, const RowNuisance& nu, const SensitivityParams& params);

/// Intention-to-treat weight Y / f(Z|X).
double owl_weight(const Observation& obs, const RowNuisance& nu);

/// Z A Y / (f(Z|X) * gap), gap = p(A=1|Z=1) - p(A=1|Z=-1).
double ivt_weight(const Observation& obs, const RowNuisance& nu, double compliance_gap);

/// Sample-proportion estimate of p(A=1|Z=1) - p(A=1|Z=-1). Throws
/// std::domain_error when it is not positive.
double compliance_gap(const Dataset& data);

/// Instrument propensity used by the OWL and IVT baselines: the fitted
/// f(Z|X) from the table, or the marginal arm shares of the sample as in an
/// analysis that treats Z as randomized with constant probability.
enum class BaselinePropensity { kModel, kMarginal };

/// Weights for every row. MR_KNOWN_FZ is not a classification method and is
/// rejected.
WeightVector compute_weights(Method method, const Dataset& data, const NuisanceTable& table,
                             const SensitivityParams& params,
                             BaselinePropensity baseline = BaselinePropensity::kModel);

/// CSV with header `row,weight,method`.
void write_weights_csv(std::ostream& out, const WeightVector& weights);

}  // namespace otrsens
