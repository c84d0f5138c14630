// Copyright 2026 The dp-lumberjack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lumberjack/errors.hpp"
#include "lumberjack/node_label.hpp"

namespace lumberjack {

// Sparse counts over the conceptual complete binary tree. Only nodes with at
// least one datapoint (or, for grown trees, nodes that were materialised) are
// stored; a missing node reads as count zero. Each layer keeps its nodes in
// ascending label order, which is what the marking pass consumes as per-layer
// queues.
class CountTree {
 public:
  struct Layer {
    std::vector<NodeLabel> labels;
    std::vector<std::int64_t> counts;
  };

  CountTree() = default;
  explicit CountTree(int height) : layers_(static_cast<std::size_t>(height)) {
    if (height < 1) throw std::invalid_argument("CountTree: height must be >= 1");
  }

  int height() const { return static_cast<int>(layers_.size()); }
  const Layer& layer(int depth) const { return layers_.at(static_cast<std::size_t>(depth)); }
  Layer& mutable_layer(int depth) { return layers_.at(static_cast<std::size_t>(depth)); }

  // Appends a node to its layer; labels within a layer must arrive ascending.
  void push_node(NodeLabel label, std::int64_t count) {
    const int d = label_depth(label);
    if (d < 0 || d >= height())
      throw std::invalid_argument("CountTree: label outside stored layers");
    Layer& l = layers_[static_cast<std::size_t>(d)];
    if (!l.labels.empty() && !(label > l.labels.back()))
      throw std::invalid_argument("CountTree: layer labels must be ascending");
    l.labels.push_back(label);
    l.counts.push_back(count);
  }

  std::int64_t count_at(NodeLabel v) const {
    const int d = label_depth(v);
    if (d < 0 || d >= height()) return 0;
    const Layer& l = layers_[static_cast<std::size_t>(d)];
    const auto it = std::lower_bound(l.labels.begin(), l.labels.end(), v);
    if (it == l.labels.end() || *it != v) return 0;
    return l.counts[static_cast<std::size_t>(it - l.labels.begin())];
  }

  bool stored(NodeLabel v) const {
    const int d = label_depth(v);
    if (d < 0 || d >= height()) return false;
    const Layer& l = layers_[static_cast<std::size_t>(d)];
    return std::binary_search(l.labels.begin(), l.labels.end(), v);
  }

  std::int64_t total() const {
    if (layers_.empty() || layers_[0].labels.empty()) return 0;
    return layers_[0].counts[0];
  }

  std::size_t stored_nodes() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) n += l.labels.size();
    return n;
  }

  // Builds a tree of the given height from counts placed on the bottom layer
  // (depth height-1); internal counts are the exact subtree sums.
  static CountTree from_leaf_counts(
      int height, std::vector<std::pair<NodeLabel, std::int64_t>> leaves) {
    CountTree t(height);
    std::sort(leaves.begin(), leaves.end());
    Layer& bottom = t.layers_[static_cast<std::size_t>(height - 1)];
    for (const auto& [label, count] : leaves) {
      if (label_depth(label) != height - 1)
        throw std::invalid_argument("from_leaf_counts: label not on the bottom layer");
      if (count <= 0)
        throw std::invalid_argument("from_leaf_counts: counts must be positive");
      if (!bottom.labels.empty() && bottom.labels.back() == label)
        throw std::invalid_argument("from_leaf_counts: duplicate leaf label");
      bottom.labels.push_back(label);
      bottom.counts.push_back(count);
    }
    for (int d = height - 1; d >= 1; --d) {
      const Layer& src = t.layers_[static_cast<std::size_t>(d)];
      Layer& dst = t.layers_[static_cast<std::size_t>(d - 1)];
      for (std::size_t i = 0; i < src.labels.size(); ++i) {
        const NodeLabel p = parent_label(src.labels[i]);
        if (!dst.labels.empty() && dst.labels.back() == p)
          dst.counts.back() += src.counts[i];
        else {
          dst.labels.push_back(p);
          dst.counts.push_back(src.counts[i]);
        }
      }
    }
    return t;
  }

  // Structural checks: in-layer ordering, depth consistency, and additivity.
  // A stored node with materialised children must carry exactly their sum;
  // nodes without stored children (bottom layer, or growth stopped by the
  // gate) are exempt since their conceptual children are simply not recorded.
  void validate() const {
    for (int d = 0; d < height(); ++d) {
      const Layer& l = layers_[static_cast<std::size_t>(d)];
      if (l.labels.size() != l.counts.size())
        throw DataError("CountTree: layer arrays out of sync");
      for (std::size_t i = 0; i < l.labels.size(); ++i) {
        if (label_depth(l.labels[i]) != d)
          throw DataError("CountTree: label stored on the wrong layer");
        if (i > 0 && !(l.labels[i] > l.labels[i - 1]))
          throw DataError("CountTree: layer labels not ascending");
        if (l.counts[i] <= 0)
          throw DataError("CountTree: stored counts must be positive");
      }
    }
    if (height() > 0 && layers_[0].labels.size() > 1)
      throw DataError("CountTree: more than one root");
    if (height() > 0 && !layers_[0].labels.empty() &&
        layers_[0].labels[0] != kRootLabel)
      throw DataError("CountTree: root label must be 1");
    for (int d = 0; d + 1 < height(); ++d) {
      const Layer& l = layers_[static_cast<std::size_t>(d)];
      const Layer& below = layers_[static_cast<std::size_t>(d + 1)];
      std::size_t j = 0;
      for (std::size_t i = 0; i < l.labels.size(); ++i) {
        const NodeLabel lo = left_child(l.labels[i]);
        const NodeLabel hi = right_child(l.labels[i]);
        while (j < below.labels.size() && below.labels[j] < lo) {
          throw DataError("CountTree: child with no stored parent");
        }
        std::int64_t sum = 0;
        bool any = false;
        while (j < below.labels.size() && below.labels[j] <= hi) {
          sum += below.counts[j];
          any = true;
          ++j;
        }
        if (any && sum != l.counts[i])
          throw DataError("CountTree: parent count differs from child sum");
      }
      if (j < below.labels.size())
        throw DataError("CountTree: child with no stored parent");
    }
  }

 private:
  std::vector<Layer> layers_;
};

}  // namespace lumberjack
