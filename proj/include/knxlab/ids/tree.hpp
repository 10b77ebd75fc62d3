#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "knxlab/error.hpp"

namespace knxlab::ids {

struct TreeParams {
  int max_depth = 8;
  int min_leaf = 2;
};

// CART binary classifier: Gini impurity, threshold splits at midpoints of
// consecutive distinct feature values, deterministic tie-breaking (lowest
// feature index, then lowest threshold). Classes are 0/1.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
    double class1_fraction = 0.0;
  };

  static DecisionTree fit(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, TreeParams params = {}) {
    if (x.empty() || x.size() != y.size())
      throw Error("tree training needs matching samples and labels");
    DecisionTree tree;
    tree.params_ = params;
    std::vector<std::size_t> indices(x.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    tree.build(x, y, indices, 0);
    return tree;
  }

  int predict(std::span<const double> features) const {
    return nodes_[leaf_for(features)].label;
  }

  // Fraction of class-1 training samples in the reached leaf.
  double score(std::span<const double> features) const {
    return nodes_[leaf_for(features)].class1_fraction;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::vector<Node>& nodes() { return nodes_; }
  const TreeParams& params() const { return params_; }
  TreeParams& params() { return params_; }

 private:
  std::size_t leaf_for(std::span<const double> features) const {
    if (nodes_.empty()) throw Error("empty decision tree");
    std::size_t at = 0;
    while (nodes_[at].feature >= 0) {
      const auto& n = nodes_[at];
      if (static_cast<std::size_t>(n.feature) >= features.size())
        throw Error("feature vector shorter than the tree expects");
      at = static_cast<std::size_t>(features[static_cast<std::size_t>(n.feature)] <= n.threshold
                                        ? n.left
                                        : n.right);
    }
    return at;
  }

  static double gini(std::size_t n1, std::size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(n1) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);
  }

  int build(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
            const std::vector<std::size_t>& indices, int depth) {
    const std::size_t n = indices.size();
    std::size_t n1 = 0;
    for (auto i : indices) n1 += static_cast<std::size_t>(y[i]);

    const auto make_leaf = [&] {
      Node leaf;
      leaf.class1_fraction = n ? static_cast<double>(n1) / static_cast<double>(n) : 0.0;
      // Majority class; ties resolve to class 0.
      leaf.label = (2 * n1 > n) ? 1 : 0;
      nodes_.push_back(leaf);
      return static_cast<int>(nodes_.size() - 1);
    };

    if (n1 == 0 || n1 == n || depth >= params_.max_depth ||
        n < 2 * static_cast<std::size_t>(params_.min_leaf))
      return make_leaf();

    const std::size_t dims = x[indices[0]].size();
    const double parent = gini(n1, n);
    double best_gain = 0.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> column(n);
    for (std::size_t f = 0; f < dims; ++f) {
      for (std::size_t i = 0; i < n; ++i)
        column[i] = {x[indices[i]][f], y[indices[i]]};
      std::sort(column.begin(), column.end());
      std::size_t left_n = 0, left_n1 = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left_n;
        left_n1 += static_cast<std::size_t>(column[i].second);
        if (column[i].first == column[i + 1].first) continue;
        if (left_n < static_cast<std::size_t>(params_.min_leaf) ||
            n - left_n < static_cast<std::size_t>(params_.min_leaf))
          continue;
        const double children =
            (static_cast<double>(left_n) * gini(left_n1, left_n) +
             static_cast<double>(n - left_n) * gini(n1 - left_n1, n - left_n)) /
            static_cast<double>(n);
        const double gain = parent - children;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }

    if (best_gain <= 0.0) return make_leaf();

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : indices)
      (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    if (left_idx.empty() || right_idx.empty()) return make_leaf();

    Node split;
    split.feature = static_cast<int>(best_feature);
    split.threshold = best_threshold;
    split.class1_fraction = static_cast<double>(n1) / static_cast<double>(n);
    nodes_.push_back(split);
    const auto at = static_cast<int>(nodes_.size() - 1);
    nodes_[static_cast<std::size_t>(at)].left = build(x, y, left_idx, depth + 1);
    nodes_[static_cast<std::size_t>(at)].right = build(x, y, right_idx, depth + 1);
    return at;
  }

  std::vector<Node> nodes_;
  TreeParams params_;
};

}  // namespace knxlab::ids
