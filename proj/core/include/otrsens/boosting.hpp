#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otrsens/regression.hpp"

namespace otrsens {

struct BoostingConfig {
  std::size_t rounds = 200;
  double learning_rate = 0.1;
  std::size_t max_bins = 32;
  std::size_t min_leaf = 5;
};

/// Least-squares gradient boosting with depth-2 regression trees. Split
/// candidates are quantile bin edges computed once from the training data,
/// so fitting involves no randomness.
class BoostedTrees {
 public:
  static BoostedTrees fit(const DesignMatrix& features, std::span<const double> y,
                          const BoostingConfig& cfg);

  double predict(std::span<const double> features) const;
  std::size_t num_trees() const { return trees_.size(); }

 private:
  struct Node {
    // Internal node when feature >= 0; leaf otherwise.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  double base_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<Tree> trees_;
};

}  // namespace otrsens
