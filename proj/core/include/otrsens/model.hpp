#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace otrsens {

/// Estimator / learner family. Used to tag weights, policies and estimates.
enum class Method { kIpw, kMr, kMrKnownFz, kOwl, kIvt };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

/// Index 0 for z = -1, 1 for z = +1.
inline std::size_t arm_index(int z) { return z > 0 ? 1 : 0; }

/// One subject: covariates, randomized instrument z in {-1,+1}, compliance
/// a in {-1,0,+1} (0 = no treatment taken) and outcome y.
struct Observation {
  std::vector<double> x;
  int z = 1;
  int a = 0;
  double y = 0.0;
};

/// Throws std::invalid_argument when z, a or the numeric fields are invalid.
void validate(const Observation& obs);

/// Ordered, immutable collection of observations sharing one covariate
/// dimension.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Observation> rows, std::size_t dim_x);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t dim_x() const { return dim_x_; }
  const Observation& operator[](std::size_t i) const { return rows_[i]; }
  const std::vector<Observation>& rows() const { return rows_; }
  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

  std::size_t count_arm(int z) const;
  bool has_both_arms() const { return count_arm(1) > 0 && count_arm(-1) > 0; }

  /// Rows at the given positions, in the order given.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<Observation> rows_;
  std::size_t dim_x_ = 0;
};

enum class Stratum { kS1 = 1, kS2, kS3, kS4, kS5, kS6, kS7, kS8, kS9 };

/// Joint potential compliance (A(-1), A(+1)) of a principal stratum.
struct PrincipalStratum {
  Stratum label;
  int a_minus;
  int a_plus;
};

PrincipalStratum principal_stratum(Stratum label);
std::string_view to_string(Stratum label);
/// True for the strata excluded under monotonicity (S7, S8, S9).
bool violates_monotonicity(Stratum label);

/// Decision function g(x) = beta0 + beta'x with regime pi(x) = sign(g(x)).
struct LinearPolicy {
  double beta0 = 0.0;
  std::vector<double> beta;

  double decision(std::span<const double> x) const;
  LinearPolicy negated() const;
};

/// sign(beta0 + beta'x) with sign(0) = +1.
int policy_decide(const LinearPolicy& policy, std::span<const double> x);

struct EvalPoint {
  std::vector<double> x;
  int optimal_action = 1;
};

double correct_classification_rate(const LinearPolicy& policy, std::span<const EvalPoint> eval_set);

/// Point estimate with an influence-function standard error.
struct EstimateWithSE {
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  Method method = Method::kIpw;
};

/// Builds an estimate from per-row values of an estimating display: the
/// estimate is their mean; the influence contributions are the centred
/// values; se = sd(contributions) / sqrt(n). Contributions are written to
/// `contributions` when non-null.
EstimateWithSE estimate_from_rows(std::span<const double> row_values, Method method,
                                  std::vector<double>* contributions = nullptr);

}  // namespace otrsens
