#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace otrsens {

/// Named substreams so independent consumers inside one replicate never share
/// draws.
enum class Stream : std::uint64_t {
  kData = 1,
  kComplierOutcome = 2,
  kMonteCarlo = 3,
  kFolds = 4,
  kTruth = 5,
  kSplit = 6,
  kLearner = 7,
  kTest = 100,
};

/// Counter-based generator keyed by (master_seed, replicate, stream). The k-th
/// output is a pure function of the key and k, so a replicate's draws do not
/// depend on which worker runs it or in what order.
class Rng {
 public:
  Rng(std::uint64_t master_seed, std::uint64_t replicate, std::uint64_t stream);
  Rng(std::uint64_t master_seed, std::uint64_t replicate, Stream stream)
      : Rng(master_seed, replicate, static_cast<std::uint64_t>(stream)) {}

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// +1 with probability p_plus, otherwise -1.
  int sign_bernoulli(double p_plus) { return uniform() < p_plus ? 1 : -1; }

  /// Index drawn from unnormalised non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace otrsens
