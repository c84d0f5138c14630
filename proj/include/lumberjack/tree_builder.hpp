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
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lumberjack/count_tree.hpp"
#include "lumberjack/dataset.hpp"
#include "lumberjack/hh.hpp"
#include "lumberjack/node_label.hpp"
#include "lumberjack/rng.hpp"
#include "lumberjack/schema.hpp"

namespace lumberjack {

enum class SplitKind { kNumericThreshold, kCategoryIs };

// One internal node's routing rule. Numeric: values <= threshold go left (a
// value landing exactly on the threshold goes left; the child ranges [l,t]
// and [t,u] share the boundary point). Categorical: the one-hot indicator of
// `category` sends matching values left.
struct SplitRule {
  SplitKind kind = SplitKind::kNumericThreshold;
  int feature = 0;
  double threshold = 0.0;  // numeric
  int category = 0;        // categorical

  bool routes_left(const double* row) const {
    if (kind == SplitKind::kNumericThreshold) return row[feature] <= threshold;
    return row[feature] == static_cast<double>(category);
  }
};

using SplitMap = std::unordered_map<NodeLabel, SplitRule, NodeLabelHash>;

// Growth output: counts only. Split rules are a pure function of
// (schema, seed, label, ancestor rules) and are re-derived on demand with
// heavy_split_rules or materialize_split_rules, so the grower never stores
// the millions of rules a deep sparse tree would otherwise drag along.
struct GrownTree {
  int depth = 0;           // leaves of the unpruned tree live at this depth
  std::uint64_t seed = 0;  // the tree seed the rules derive from
  CountTree counts;        // layers 0..depth
};

struct GrowthStats {
  std::int64_t element_moves = 0;  // points partitioned across all splits
  std::int64_t forced_leaves = 0;  // nodes whose feature pool ran dry
};

namespace detail {

inline constexpr std::uint64_t kSplitTag = 0x73706c6974ULL;

// Per-path feature state: current numeric ranges and consumed categories.
// Mutated on descent, restored on return, so growth never copies it.
struct RangeState {
  std::vector<double> lo, hi;
  std::vector<std::vector<bool>> used;
  std::vector<int> used_count;

  explicit RangeState(const FeatureSchema& schema) {
    const int nf = schema.num_features();
    lo.resize(static_cast<std::size_t>(nf));
    hi.resize(static_cast<std::size_t>(nf));
    used.resize(static_cast<std::size_t>(nf));
    used_count.assign(static_cast<std::size_t>(nf), 0);
    for (int f = 0; f < nf; ++f) {
      const FeatureSpec& spec = schema.features[static_cast<std::size_t>(f)];
      if (spec.kind == FeatureKind::kNumeric) {
        lo[static_cast<std::size_t>(f)] = spec.lower;
        hi[static_cast<std::size_t>(f)] = spec.upper;
      } else {
        used[static_cast<std::size_t>(f)].assign(
            static_cast<std::size_t>(spec.domain_size()), false);
      }
    }
  }

  bool splittable(const FeatureSchema& schema, int f) const {
    const FeatureSpec& spec = schema.features[static_cast<std::size_t>(f)];
    if (spec.kind == FeatureKind::kNumeric)
      return lo[static_cast<std::size_t>(f)] < hi[static_cast<std::size_t>(f)];
    return used_count[static_cast<std::size_t>(f)] < spec.domain_size();
  }
};

// RangeState plus the push/pop protocol for a DFS over rules. Descending left
// narrows a numeric range to [l, t] or consumes a category; the right branch
// gets [t, u] with the category equally consumed. Saved bounds live on an
// explicit stack across the recursion.
struct StateWalker {
  RangeState state;
  std::vector<double> saved;

  explicit StateWalker(const FeatureSchema& schema) : state(schema) {}

  void push_rule(const SplitRule& r) {
    if (r.kind == SplitKind::kNumericThreshold) {
      saved.push_back(state.hi[static_cast<std::size_t>(r.feature)]);
      state.hi[static_cast<std::size_t>(r.feature)] = r.threshold;
    } else {
      state.used[static_cast<std::size_t>(r.feature)][static_cast<std::size_t>(r.category)] = true;
      ++state.used_count[static_cast<std::size_t>(r.feature)];
    }
  }

  void pop_left(const SplitRule& r) {
    if (r.kind == SplitKind::kNumericThreshold) {
      state.hi[static_cast<std::size_t>(r.feature)] = saved.back();
      saved.pop_back();
      saved.push_back(state.lo[static_cast<std::size_t>(r.feature)]);
      state.lo[static_cast<std::size_t>(r.feature)] = r.threshold;
    }
  }

  void pop_rule(const SplitRule& r) {
    if (r.kind == SplitKind::kNumericThreshold) {
      state.lo[static_cast<std::size_t>(r.feature)] = saved.back();
      saved.pop_back();
    } else {
      state.used[static_cast<std::size_t>(r.feature)][static_cast<std::size_t>(r.category)] = false;
      --state.used_count[static_cast<std::size_t>(r.feature)];
    }
  }
};

}  // namespace detail

// Draws the split rule for the node with the given label. The only inputs are
// the tree seed, the label, and the path state distilled from ancestor rules;
// counts never enter, which is what keeps the structure data-independent.
// Feature choice is uniform; a drawn categorical feature with every category
// consumed is excluded and the draw repeats over the remaining features.
// Returns nullopt when no splittable feature remains (a forced leaf).
inline std::optional<SplitRule> draw_split(const FeatureSchema& schema,
                                           const detail::RangeState& state,
                                           NodeLabel label,
                                           std::uint64_t tree_seed) {
  SmallRng rng(derive_seed(
      tree_seed, {detail::kSplitTag, static_cast<std::uint64_t>(label >> 64),
                  static_cast<std::uint64_t>(label)}));
  const int nf = schema.num_features();
  // Exclusion set without allocation for the common narrow-schema case.
  std::uint64_t excluded_mask = 0;
  std::vector<bool> excluded_wide;
  if (nf > 64) excluded_wide.assign(static_cast<std::size_t>(nf), false);
  const auto is_excluded = [&](int f) {
    return nf > 64 ? bool(excluded_wide[static_cast<std::size_t>(f)])
                   : ((excluded_mask >> f) & 1u) != 0;
  };
  const auto exclude = [&](int f) {
    if (nf > 64)
      excluded_wide[static_cast<std::size_t>(f)] = true;
    else
      excluded_mask |= std::uint64_t{1} << f;
  };
  int remaining = nf;
  while (remaining > 0) {
    // Uniform over the non-excluded features: draw a rank, scan to it.
    std::uint64_t rank = rng.uniform_int(static_cast<std::uint64_t>(remaining));
    int f = 0;
    for (;; ++f) {
      if (is_excluded(f)) continue;
      if (rank == 0) break;
      --rank;
    }
    if (!state.splittable(schema, f)) {
      exclude(f);
      --remaining;
      continue;
    }
    const FeatureSpec& spec = schema.features[static_cast<std::size_t>(f)];
    if (spec.kind == FeatureKind::kNumeric) {
      const double l = state.lo[static_cast<std::size_t>(f)];
      const double u = state.hi[static_cast<std::size_t>(f)];
      double t = 0.0;
      bool got = false;
      for (int tries = 0; tries < 64; ++tries) {
        t = rng.uniform(l, u);
        if (t > l && t < u) {
          got = true;
          break;
        }
      }
      if (!got) {
        // Interval too narrow for an interior double; treat as exhausted.
        exclude(f);
        --remaining;
        continue;
      }
      SplitRule r;
      r.kind = SplitKind::kNumericThreshold;
      r.feature = f;
      r.threshold = t;
      return r;
    }
    const int unused =
        spec.domain_size() - state.used_count[static_cast<std::size_t>(f)];
    std::uint64_t k = rng.uniform_int(static_cast<std::uint64_t>(unused));
    int cat = -1;
    for (int c = 0; c < spec.domain_size(); ++c) {
      if (state.used[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)])
        continue;
      if (k == 0) {
        cat = c;
        break;
      }
      --k;
    }
    SplitRule r;
    r.kind = SplitKind::kCategoryIs;
    r.feature = f;
    r.category = cat;
    return r;
  }
  return std::nullopt;
}

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, const FeatureSchema& schema, int depth,
             std::int64_t gate, std::uint64_t tree_seed, GrowthStats* stats)
      : data_(data), schema_(schema), depth_(depth), gate_(gate),
        tree_seed_(tree_seed), stats_(stats), walker_(schema),
        tree_{depth, tree_seed, CountTree(depth + 1)} {
    idx_.resize(data.n);
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
  }

  GrownTree run() {
    if (data_.n > 0) grow(kRootLabel, 0, 0, idx_.size());
    return std::move(tree_);
  }

 private:
  void grow(NodeLabel label, int depth, std::size_t begin, std::size_t end) {
    tree_.counts.push_node(label, static_cast<std::int64_t>(end - begin));
    if (depth == depth_) return;
    if (static_cast<std::int64_t>(end - begin) <= gate_) return;

    const std::optional<SplitRule> rule =
        draw_split(schema_, walker_.state, label, tree_seed_);
    if (!rule) {
      if (stats_) ++stats_->forced_leaves;
      return;
    }

    const auto mid = std::partition(
        idx_.begin() + static_cast<std::ptrdiff_t>(begin),
        idx_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t i) { return rule->routes_left(data_.row(i)); });
    const std::size_t split_at = static_cast<std::size_t>(mid - idx_.begin());
    if (stats_) stats_->element_moves += static_cast<std::int64_t>(end - begin);

    walker_.push_rule(*rule);
    if (split_at > begin) grow(left_child(label), depth + 1, begin, split_at);
    walker_.pop_left(*rule);
    if (end > split_at) grow(right_child(label), depth + 1, split_at, end);
    walker_.pop_rule(*rule);
  }

  const Dataset& data_;
  const FeatureSchema& schema_;
  const int depth_;
  const std::int64_t gate_;
  const std::uint64_t tree_seed_;
  GrowthStats* stats_;
  detail::StateWalker walker_;
  GrownTree tree_;
  std::vector<std::size_t> idx_;
};

}  // namespace detail

// Grows one random tree to the given depth over the dataset. Structure is a
// function of (schema, depth, gate, tree_seed) plus nothing else; the data
// only decides which part of that structure is materialised. Nodes holding at
// most `gate` points are recorded but not split: with the gate at
// tau - delta_gate - 1 their whole subtree is a deterministic Bottom for the
// marking pass, so materialising it would be wasted work. Partitioning is
// in-place and touches each point once per level.
inline GrownTree grow_random_tree(const Dataset& data, const FeatureSchema& schema,
                                  int depth, std::int64_t gate,
                                  std::uint64_t tree_seed,
                                  GrowthStats* stats = nullptr) {
  if (depth < 1) throw std::invalid_argument("grow_random_tree: depth must be >= 1");
  if (gate < 0) throw std::invalid_argument("grow_random_tree: gate must be >= 0");
  if (data.n == 0) throw std::invalid_argument("grow_random_tree: empty dataset");
  if (data.num_features != schema.num_features())
    throw std::invalid_argument("grow_random_tree: dataset does not match schema");
  detail::TreeGrower grower(data, schema, depth, gate, tree_seed, stats);
  return grower.run();
}

// Re-derives the split rules of every marked node, walking only the marked
// subtree. The marked set is upward closed (a node is only marked when its
// parent is), so the walk from the root reaches all of it; after pruning
// these are the only rules predictions or serialisation ever consult. A
// marked node whose draw comes up empty contributes no entry, matching its
// treatment during growth.
inline SplitMap heavy_split_rules(const FeatureSchema& schema,
                                  std::uint64_t tree_seed, int depth,
                                  const HeavySet& heavy) {
  SplitMap out;
  detail::StateWalker walker(schema);
  const auto walk = [&](auto&& self, NodeLabel label, int d) -> void {
    if (d >= depth || !heavy.contains(label)) return;
    const std::optional<SplitRule> rule =
        draw_split(schema, walker.state, label, tree_seed);
    if (!rule) return;
    out.emplace(label, *rule);
    walker.push_rule(*rule);
    self(self, left_child(label), d + 1);
    walker.pop_left(*rule);
    self(self, right_child(label), d + 1);
    walker.pop_rule(*rule);
  };
  walk(walk, kRootLabel, 0);
  return out;
}

// Re-derives the split rules at an explicit set of labels, which need not be
// upward closed. Each label's root path is replayed from scratch (ancestor
// rules advance the path state without being recorded), so cost is one draw
// per path node; intended for inspection and tests, not hot paths. Labels at
// the full depth or below a forced leaf have no rule and are skipped.
inline SplitMap materialize_split_rules(const FeatureSchema& schema,
                                        std::uint64_t tree_seed, int depth,
                                        const std::vector<NodeLabel>& labels) {
  SplitMap out;
  for (NodeLabel target : labels) {
    const int td = label_depth(target);
    if (td >= depth || out.count(target)) continue;
    detail::StateWalker walker(schema);
    NodeLabel cur = kRootLabel;
    bool dead = false;
    for (int d = 0; d < td; ++d) {
      const std::optional<SplitRule> rule =
          draw_split(schema, walker.state, cur, tree_seed);
      if (!rule) {
        dead = true;  // forced leaf above the target: no such node
        break;
      }
      const bool go_right = ((target >> (td - 1 - d)) & 1) != 0;
      walker.push_rule(*rule);
      if (go_right) walker.pop_left(*rule);
      cur = go_right ? right_child(cur) : left_child(cur);
    }
    if (dead) continue;
    const std::optional<SplitRule> rule =
        draw_split(schema, walker.state, cur, tree_seed);
    if (rule) out.emplace(target, *rule);
  }
  return out;
}

// Walks a row down the pruned tree: descend while the current node is Heavy
// and has a materialised rule, stopping at the first non-Heavy node, at a
// forced leaf, or at the full depth. The returned label may denote a node no
// training point reached (an empty leaf); the caller must have a predictor
// for it like for any other leaf.
inline NodeLabel resolve_leaf(const SplitMap& splits, const HeavySet& heavy,
                              int depth, const double* row) {
  NodeLabel cur = kRootLabel;
  int t = 0;
  while (t < depth && heavy.contains(cur)) {
    const auto it = splits.find(cur);
    if (it == splits.end()) break;
    cur = it->second.routes_left(row) ? left_child(cur) : right_child(cur);
    ++t;
  }
  return cur;
}

inline NodeLabel resolve_leaf(const GrownTree& tree, const HeavySet& heavy,
                              const SplitMap& splits, const double* row) {
  return resolve_leaf(splits, heavy, tree.depth, row);
}

// All leaves of the pruned tree, ascending: the non-Heavy children of Heavy
// nodes that carry rules, Heavy forced leaves, and the root when nothing is
// Heavy. Every resolve_leaf result is one of these.
inline std::vector<NodeLabel> pruned_leaves(const SplitMap& splits,
                                            const HeavySet& heavy) {
  std::vector<NodeLabel> out;
  if (!heavy.contains(kRootLabel)) {
    out.push_back(kRootLabel);
    return out;
  }
  for (NodeLabel u : heavy.raw()) {
    if (splits.find(u) == splits.end()) {
      out.push_back(u);  // forced leaf that was marked Heavy
      continue;
    }
    for (NodeLabel c : {left_child(u), right_child(u)})
      if (!heavy.contains(c)) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lumberjack
