#include "otrsens/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otrsens/numerics.hpp"

namespace otrsens {
namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  std::size_t bin = 0;  // rows with bin index <= bin go left
  double gain = 0.0;
};

// Candidate thresholds for one feature: distinct quantile cut points.
std::vector<double> quantile_edges(std::vector<double> values, std::size_t max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> edges;
  const std::size_t n = values.size();
  for (std::size_t b = 1; b < max_bins; ++b) {
    const double v = values[std::min(n - 1, b * n / max_bins)];
    if (edges.empty() || v > edges.back()) edges.push_back(v);
  }
  // Drop an edge equal to the maximum, it would leave the right side empty.
  while (!edges.empty() && edges.back() >= values.back()) edges.pop_back();
  return edges;
}

}  // namespace

BoostedTrees BoostedTrees::fit(const DesignMatrix& features, std::span<const double> y,
                               const BoostingConfig& cfg) {
  const std::size_t n = features.rows;
  const std::size_t p = features.cols;
  if (n != y.size() || n == 0) {
    throw std::invalid_argument("boosting: feature and response sizes differ");
  }
  if (cfg.learning_rate <= 0.0 || cfg.max_bins < 2 || cfg.min_leaf == 0) {
    throw std::invalid_argument("boosting: invalid configuration");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericalError("boosting: non-finite response");
  }

  // Bin every row once; bin k means value <= edges[k] (and > edges[k-1]).
  std::vector<std::vector<double>> edges(p);
  std::vector<std::vector<std::size_t>> bins(p, std::vector<std::size_t>(n));
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = features(i, j);
    edges[j] = quantile_edges(col, cfg.max_bins);
    for (std::size_t i = 0; i < n; ++i) {
      bins[j][i] = static_cast<std::size_t>(
          std::lower_bound(edges[j].begin(), edges[j].end(), col[i]) - edges[j].begin());
    }
  }

  BoostedTrees model;
  model.learning_rate_ = cfg.learning_rate;
  model.base_ = mean(y);
  std::vector<double> pred(n, model.base_);
  std::vector<double> resid(n);

  auto best_split = [&](const std::vector<std::size_t>& rows) {
    Split best;
    double total = 0.0;
    for (std::size_t i : rows) total += resid[i];
    const double cnt = static_cast<double>(rows.size());
    const double base_score = total * total / cnt;
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t nb = edges[j].size() + 1;
      std::vector<double> sum(nb, 0.0);
      std::vector<std::size_t> num(nb, 0);
      for (std::size_t i : rows) {
        sum[bins[j][i]] += resid[i];
        ++num[bins[j][i]];
      }
      double left_sum = 0.0;
      std::size_t left_n = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        left_sum += sum[b];
        left_n += num[b];
        const std::size_t right_n = rows.size() - left_n;
        if (left_n < cfg.min_leaf || right_n < cfg.min_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                            right_sum * right_sum / static_cast<double>(right_n) - base_score;
        if (gain > best.gain + 1e-12) {
          best = {true, j, b, gain};
        }
      }
    }
    return best;
  };

  auto leaf_value = [&](const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (std::size_t i : rows) s += resid[i];
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
  };

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - pred[i];
    Tree tree;
    // Grows `rows` into the subtree rooted at tree.nodes[index].
    auto grow = [&](auto&& self, int index, const std::vector<std::size_t>& rows, int depth) -> void {
      const Split s = depth < 2 ? best_split(rows) : Split{};
      if (!s.found) {
        tree.nodes[static_cast<std::size_t>(index)].value = leaf_value(rows);
        return;
      }
      std::vector<std::size_t> left;
      std::vector<std::size_t> right;
      for (std::size_t i : rows) (bins[s.feature][i] <= s.bin ? left : right).push_back(i);
      const int li = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      Node& node = tree.nodes[static_cast<std::size_t>(index)];
      node.feature = static_cast<int>(s.feature);
      node.threshold = edges[s.feature][s.bin];
      node.left = li;
      node.right = li + 1;
      self(self, li, left, depth + 1);
      self(self, li + 1, right, depth + 1);
    };
    tree.nodes.emplace_back();
    grow(grow, 0, all, 0);
    if (tree.nodes.size() == 1 && std::abs(tree.nodes[0].value) < 1e-15) {
      break;  // nothing left to fit
    }
    model.trees_.push_back(std::move(tree));
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += cfg.learning_rate * [&] {
        const auto& nodes = model.trees_.back().nodes;
        std::size_t k = 0;
        while (nodes[k].feature >= 0) {
          const auto f = static_cast<std::size_t>(nodes[k].feature);
          k = static_cast<std::size_t>(features(i, f) <= nodes[k].threshold ? nodes[k].left
                                                                             : nodes[k].right);
        }
        return nodes[k].value;
      }();
    }
  }
  return model;
}

double BoostedTrees::predict(std::span<const double> features) const {
  double out = base_;
  for (const auto& tree : trees_) {
    std::size_t k = 0;
    while (tree.nodes[k].feature >= 0) {
      const auto f = static_cast<std::size_t>(tree.nodes[k].feature);
      if (f >= features.size()) throw std::invalid_argument("boosting: feature vector too short");
      k = static_cast<std::size_t>(features[f] <= tree.nodes[k].threshold ? tree.nodes[k].left
                                                                         : tree.nodes[k].right);
    }
    out += learning_rate_ * tree.nodes[k].value;
  }
  return out;
}

}  // namespace otrsens
