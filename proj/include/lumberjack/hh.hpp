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
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "lumberjack/count_tree.hpp"
#include "lumberjack/node_label.hpp"
#include "lumberjack/rng.hpp"
#include "lumberjack/threshold.hpp"

namespace lumberjack {

// Upward-closed set of nodes kept by the pruning pass: every marked non-root
// node has a marked parent.
class HeavySet {
 public:
  bool contains(NodeLabel v) const { return set_.find(v) != set_.end(); }
  void insert(NodeLabel v) { set_.insert(v); }
  std::size_t size() const { return set_.size(); }
  bool empty() const { return set_.empty(); }

  const std::unordered_set<NodeLabel, NodeLabelHash>& raw() const { return set_; }

  std::vector<NodeLabel> sorted_labels() const {
    std::vector<NodeLabel> out(set_.begin(), set_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  bool is_upward_closed() const {
    for (NodeLabel v : set_)
      if (v != kRootLabel && set_.find(parent_label(v)) == set_.end()) return false;
    return true;
  }

 private:
  std::unordered_set<NodeLabel, NodeLabelHash> set_;
};

// One oracle invocation as seen by the instrumentation hook. Gated queries
// (deterministic Bottom) are recorded like any other call; they count against
// the per-datapoint touch bound even though they consume no noise.
struct QueryRecord {
  NodeLabel label = 0;
  std::int64_t count = 0;
  bool top = false;
};

namespace detail {

class Marker {
 public:
  Marker(const CountTree& tree, const ThresholdOracleConfig& cfg, RngStream& rng,
         std::vector<QueryRecord>* log)
      : tree_(tree), cfg_(cfg), rng_(rng), log_(log),
        heads_(static_cast<std::size_t>(tree.height()), 0) {}

  void run(int h) {
    if (tree_.layer(0).labels.empty()) return;
    mark_subtree(kRootLabel, 0, h, tree_.layer(0).counts[0]);
  }

  HeavySet take_heavy() { return std::move(heavy_); }

 private:
  void query(NodeLabel u, std::int64_t count) {
    if (heavy_.contains(u)) return;
    // The recursion must never revisit a node that an earlier query marked
    // Light; checked unconditionally rather than trusted.
    if (light_.find(u) != light_.end())
      throw std::logic_error("marking pass revisited a Light node");
    const bool top = check_threshold(count, cfg_, rng_);
    if (log_) log_->push_back({u, count, top});
    if (top) {
      NodeLabel a = u;
      while (true) {
        if (heavy_.contains(a)) break;
        heavy_.insert(a);
        if (a == kRootLabel) break;
        a = parent_label(a);
      }
    } else {
      light_.insert(u);
    }
  }

  // Consumes the stored nodes of one layer with labels in [lo, hi), advancing
  // that layer's queue head. Recursion order guarantees the head only ever
  // moves forward.
  template <typename Fn>
  void consume(int depth, NodeLabel lo, NodeLabel hi, Fn&& fn) {
    const CountTree::Layer& l = tree_.layer(depth);
    std::size_t& head = heads_[static_cast<std::size_t>(depth)];
    while (head < l.labels.size() && l.labels[head] < lo) ++head;
    while (head < l.labels.size() && l.labels[head] < hi) {
      const std::size_t i = head++;
      fn(l.labels[i], l.counts[i]);
    }
  }

  // Three-phase recursive marking of the height-h subtree rooted at `root`
  // (whose top layer sits at absolute depth `top_depth`). The root's own
  // count travels with the call because the caller consumed its queue entry
  // when it enumerated the node.
  void mark_subtree(NodeLabel root, int top_depth, int h, std::int64_t root_count) {
    if (h == 1) {
      query(root, root_count);
      return;
    }
    const int mid = h / 2;
    const int mid_depth = top_depth + mid;

    consume(mid_depth, layer_begin(root, mid), layer_end(root, mid),
            [&](NodeLabel lab, std::int64_t cnt) { query(lab, cnt); });

    if (h >= 3) {
      const int child_depth = mid_depth + 1;
      const int h2 = h - mid - 1;
      consume(child_depth, layer_begin(root, mid + 1), layer_end(root, mid + 1),
              [&](NodeLabel lab, std::int64_t cnt) {
                if (light_.find(parent_label(lab)) != light_.end()) return;
                if (h2 == 1)
                  query(lab, cnt);
                else
                  mark_subtree(lab, child_depth, h2, cnt);
              });
    }

    mark_subtree(root, top_depth, mid, root_count);
  }

  const CountTree& tree_;
  const ThresholdOracleConfig& cfg_;
  RngStream& rng_;
  std::vector<QueryRecord>* log_;
  HeavySet heavy_;
  std::unordered_set<NodeLabel, NodeLabelHash> light_;
  std::vector<std::size_t> heads_;
};

}  // namespace detail

// Heavy-hitter marking over layers 0..h-1 of the count tree. Runs in time
// linear in the number of stored nodes: per-layer queues are consumed in
// ascending label order and empty subtrees are never visited, which requires
// tau >= 1 + delta_gate so that unstored (zero-count) nodes are deterministic
// Bottoms. An optional log records every oracle call for instrumentation.
inline HeavySet mark_heavy_hitters(const CountTree& tree, int h,
                                   const ThresholdOracleConfig& cfg, RngStream& rng,
                                   std::vector<QueryRecord>* query_log = nullptr) {
  cfg.validate();
  if (h < 1 || h > tree.height())
    throw std::invalid_argument("mark_heavy_hitters: h outside stored layers");
  if (!(cfg.tau >= 1.0 + cfg.delta_gate))
    throw std::invalid_argument(
        "mark_heavy_hitters: the skip-empty path requires tau >= 1 + delta_gate");
  detail::Marker marker(tree, cfg, rng, query_log);
  marker.run(h);
  return marker.take_heavy();
}

namespace detail {

class ReferenceMarker {
 public:
  ReferenceMarker(const CountTree& tree, const ThresholdOracleConfig& cfg,
                  RngStream& rng, std::vector<QueryRecord>* log)
      : tree_(tree), cfg_(cfg), rng_(rng), log_(log) {}

  void run(int h) { mark_subtree(kRootLabel, h); }

  HeavySet take_heavy() { return std::move(heavy_); }

 private:
  void query(NodeLabel u) {
    if (heavy_.contains(u)) return;
    if (light_.find(u) != light_.end())
      throw std::logic_error("reference marking revisited a Light node");
    const std::int64_t count = tree_.count_at(u);
    const bool top = check_threshold(count, cfg_, rng_);
    if (log_) log_->push_back({u, count, top});
    if (top) {
      NodeLabel a = u;
      while (true) {
        if (heavy_.contains(a)) break;
        heavy_.insert(a);
        if (a == kRootLabel) break;
        a = parent_label(a);
      }
    } else {
      light_.insert(u);
    }
  }

  void mark_subtree(NodeLabel root, int h) {
    if (h == 1) {
      query(root);
      return;
    }
    const int mid = h / 2;
    for (NodeLabel lab = layer_begin(root, mid); lab < layer_end(root, mid); ++lab)
      query(lab);
    if (h >= 3) {
      const int h2 = h - mid - 1;
      for (NodeLabel lab = layer_begin(root, mid + 1);
           lab < layer_end(root, mid + 1); ++lab) {
        if (light_.find(parent_label(lab)) != light_.end()) continue;
        if (h2 == 1)
          query(lab);
        else
          mark_subtree(lab, h2);
      }
    }
    mark_subtree(root, mid);
  }

  const CountTree& tree_;
  const ThresholdOracleConfig& cfg_;
  RngStream& rng_;
  std::vector<QueryRecord>* log_;
  HeavySet heavy_;
  std::unordered_set<NodeLabel, NodeLabelHash> light_;
};

}  // namespace detail

// Non-skipping reference: walks the full conceptual tree, querying empty
// nodes too, and accepts any tau. Exponential in h, so test-sized trees only.
// With tau >= 1 + delta_gate it consumes the noise stream identically to the
// efficient pass (empty nodes are gated before sampling), so both produce the
// same Heavy set realization for the same seed.
inline HeavySet mark_heavy_hitters_reference(
    const CountTree& tree, int h, const ThresholdOracleConfig& cfg, RngStream& rng,
    std::vector<QueryRecord>* query_log = nullptr) {
  cfg.validate();
  if (h < 1 || h > tree.height())
    throw std::invalid_argument("mark_heavy_hitters_reference: h outside stored layers");
  if (h > 25)
    throw std::invalid_argument("mark_heavy_hitters_reference: tree too tall");
  detail::ReferenceMarker marker(tree, cfg, rng, query_log);
  marker.run(h);
  return marker.take_heavy();
}

// Exact heavy set {stored u at depth < h : count(u) > tau}. Upward closed by
// count monotonicity. For tau < 0 every unstored (empty) node of the
// conceptual tree would qualify too, since empty means count zero; the result
// is restricted to stored nodes by construction, which is the useful reading.
inline HeavySet brute_force_heavy(const CountTree& tree, int h, double tau) {
  if (h < 1 || h > tree.height())
    throw std::invalid_argument("brute_force_heavy: h outside stored layers");
  HeavySet out;
  for (int d = 0; d < h; ++d) {
    const CountTree::Layer& l = tree.layer(d);
    for (std::size_t i = 0; i < l.labels.size(); ++i)
      if (static_cast<double>(l.counts[i]) > tau) out.insert(l.labels[i]);
  }
  return out;
}

// Whole-tree form: every stored layer participates. truncated_to_stored, when
// given, reports whether unstored nodes of the conceptual tree would also have
// cleared the threshold (possible only for tau < 0).
inline HeavySet brute_force_heavy(const CountTree& tree, double tau,
                                  bool* truncated_to_stored = nullptr) {
  if (truncated_to_stored) *truncated_to_stored = tau < 0.0;
  return brute_force_heavy(tree, tree.height(), tau);
}

// Debug dump: one line per Heavy node, label<TAB>depth<TAB>count, labels
// ascending.
inline std::string dump_heavy(const CountTree& tree, const HeavySet& heavy) {
  std::string out;
  for (NodeLabel u : heavy.sorted_labels()) {
    out += label_to_string(u);
    out += '\t';
    out += std::to_string(label_depth(u));
    out += '\t';
    out += std::to_string(tree.count_at(u));
    out += '\n';
  }
  return out;
}

// Top-down breadth-first baseline: every visited node gets fresh Gaussian
// noise of variance h/(2 rho) and the subtree is pruned when the noisy count
// fails the threshold. Comparison baseline only; it wastes budget linearly in
// h where the recursive pass pays only 1 + floor(log2 h).
inline HeavySet baseline_topdown(const CountTree& tree, int h, double tau,
                                 double rho, RngStream& rng) {
  if (h < 1 || h > tree.height())
    throw std::invalid_argument("baseline_topdown: h outside stored layers");
  if (!(rho > 0.0))
    throw std::invalid_argument("baseline_topdown: rho must be positive");
  const double sd = std::sqrt(static_cast<double>(h) / (2.0 * rho));
  HeavySet out;
  std::deque<NodeLabel> frontier;
  if (!tree.layer(0).labels.empty()) frontier.push_back(kRootLabel);
  while (!frontier.empty()) {
    const NodeLabel u = frontier.front();
    frontier.pop_front();
    const double noisy = static_cast<double>(tree.count_at(u)) + rng.gaussian(sd);
    if (!(noisy > tau)) continue;
    out.insert(u);
    if (label_depth(u) + 1 < h) {
      for (NodeLabel c : {left_child(u), right_child(u)})
        if (tree.stored(c)) frontier.push_back(c);
    }
  }
  return out;
}

}  // namespace lumberjack
