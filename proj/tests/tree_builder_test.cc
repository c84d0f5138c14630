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

#include "lumberjack/tree_builder.hpp"

#include <cstdint>
#include <map>
#include <vector>

#include "gtest/gtest.h"
#include "lumberjack/datagen.hpp"
#include "lumberjack/dataset.hpp"
#include "lumberjack/rng.hpp"
#include "lumberjack/schema.hpp"

namespace lumberjack {
namespace {

FeatureSchema two_numeric_schema() {
  FeatureSchema s;
  s.label_name = "y";
  s.classes = {"a", "b"};
  FeatureSpec f1;
  f1.name = "x1";
  f1.kind = FeatureKind::kNumeric;
  f1.lower = 0.0;
  f1.upper = 10.0;
  FeatureSpec f2;
  f2.name = "x2";
  f2.kind = FeatureKind::kNumeric;
  f2.lower = -5.0;
  f2.upper = 5.0;
  s.features = {f1, f2};
  return s;
}

FeatureSchema one_categorical_schema(int cats) {
  FeatureSchema s;
  s.label_name = "y";
  s.classes = {"a", "b"};
  FeatureSpec f;
  f.name = "c";
  f.kind = FeatureKind::kCategorical;
  for (int i = 0; i < cats; ++i) f.domain.push_back("v" + std::to_string(i));
  s.features = {f};
  return s;
}

Dataset uniform_data(const FeatureSchema& schema, std::size_t n,
                     std::uint64_t seed) {
  Dataset d;
  d.num_features = schema.num_features();
  RngStream rng(seed);
  std::vector<double> row(static_cast<std::size_t>(d.num_features));
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < d.num_features; ++f) {
      const FeatureSpec& spec = schema.features[static_cast<std::size_t>(f)];
      if (spec.kind == FeatureKind::kNumeric) {
        row[static_cast<std::size_t>(f)] = rng.uniform(spec.lower, spec.upper);
      } else {
        row[static_cast<std::size_t>(f)] = static_cast<double>(
            rng.uniform_int(static_cast<std::uint64_t>(spec.domain_size())));
      }
    }
    d.append_row(row, static_cast<int>(i % 2));
  }
  return d;
}

TEST(DrawSplit, DeterministicAndInRange) {
  const FeatureSchema schema = two_numeric_schema();
  detail::RangeState state(schema);
  const auto a = draw_split(schema, state, kRootLabel, 42);
  const auto b = draw_split(schema, state, kRootLabel, 42);
  ASSERT_TRUE(a.has_value());
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(a->feature, b->feature);
  EXPECT_EQ(a->threshold, b->threshold);
  const FeatureSpec& spec = schema.features[static_cast<std::size_t>(a->feature)];
  EXPECT_GT(a->threshold, spec.lower);
  EXPECT_LT(a->threshold, spec.upper);
  const auto c = draw_split(schema, state, kRootLabel, 43);
  ASSERT_TRUE(c.has_value());
  EXPECT_TRUE(c->feature != a->feature || c->threshold != a->threshold);
}

TEST(DrawSplit, CategoricalDrawsOnlyUnusedCategories) {
  const FeatureSchema schema = one_categorical_schema(3);
  detail::RangeState state(schema);
  state.used[0][1] = true;
  state.used_count[0] = 1;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto r = draw_split(schema, state, kRootLabel, s);
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->kind, SplitKind::kCategoryIs);
    EXPECT_NE(r->category, 1);
  }
}

TEST(DrawSplit, ExhaustedStateYieldsNoRule) {
  const FeatureSchema schema = one_categorical_schema(2);
  detail::RangeState state(schema);
  state.used[0][0] = true;
  state.used[0][1] = true;
  state.used_count[0] = 2;
  EXPECT_FALSE(draw_split(schema, state, kRootLabel, 7).has_value());
}

TEST(SplitRule, RoutingBoundaryGoesLeft) {
  SplitRule r;
  r.kind = SplitKind::kNumericThreshold;
  r.feature = 0;
  r.threshold = 2.5;
  const double left[] = {2.5, 0.0};
  const double also_left[] = {1.0, 0.0};
  const double right[] = {2.5000001, 0.0};
  EXPECT_TRUE(r.routes_left(left));
  EXPECT_TRUE(r.routes_left(also_left));
  EXPECT_FALSE(r.routes_left(right));

  SplitRule c;
  c.kind = SplitKind::kCategoryIs;
  c.feature = 1;
  c.category = 2;
  const double match[] = {0.0, 2.0};
  const double miss[] = {0.0, 1.0};
  EXPECT_TRUE(c.routes_left(match));
  EXPECT_FALSE(c.routes_left(miss));
}

// Re-partitions the data with independently re-derived rules and checks the
// stored counts match. This pins growth to the pure (seed, label, path)
// function of the rules: the data chooses which nodes exist, never what the
// rules are.
void check_counts_match_rederived_rules(const Dataset& data,
                                        const FeatureSchema& schema, int depth,
                                        std::int64_t gate,
                                        std::uint64_t tree_seed) {
  const GrownTree tree = grow_random_tree(data, schema, depth, gate, tree_seed);
  EXPECT_EQ(tree.seed, tree_seed);
  std::vector<NodeLabel> internal;
  for (int d = 0; d < depth; ++d) {
    const CountTree::Layer& l = tree.counts.layer(d);
    internal.insert(internal.end(), l.labels.begin(), l.labels.end());
  }
  const SplitMap rules =
      materialize_split_rules(schema, tree_seed, depth, internal);

  std::map<NodeLabel, std::int64_t> landed;
  for (std::size_t i = 0; i < data.n; ++i) {
    NodeLabel u = kRootLabel;
    landed[u] += 1;
    for (int d = 0; d < depth; ++d) {
      if (tree.counts.count_at(u) <= gate) break;  // growth stopped here
      const auto it = rules.find(u);
      if (it == rules.end()) break;  // forced leaf
      u = it->second.routes_left(data.row(i)) ? left_child(u) : right_child(u);
      landed[u] += 1;
    }
  }
  for (int d = 0; d <= depth; ++d) {
    const CountTree::Layer& l = tree.counts.layer(d);
    for (std::size_t i = 0; i < l.labels.size(); ++i) {
      EXPECT_EQ(l.counts[i], landed[l.labels[i]])
          << "depth " << d << " mismatched count";
    }
  }
}

TEST(GrowRandomTree, CountsAreExactlyThePartitionOfTheRules) {
  const FeatureSchema schema = two_numeric_schema();
  check_counts_match_rederived_rules(uniform_data(schema, 500, 1), schema, 8, 0,
                                     90210);
}

TEST(GrowRandomTree, SameSeedSameStructureAcrossDatasets) {
  // Two different datasets under one seed: every label materialised by both
  // trees carries the same re-derived rule, and each dataset's counts are the
  // partition of the shared rule function.
  const FeatureSchema schema = two_numeric_schema();
  const std::uint64_t seed = 31337;
  const Dataset da = uniform_data(schema, 400, 2);
  const Dataset db = uniform_data(schema, 700, 3);
  check_counts_match_rederived_rules(da, schema, 7, 0, seed);
  check_counts_match_rederived_rules(db, schema, 7, 0, seed);

  const GrownTree ta = grow_random_tree(da, schema, 7, 0, seed);
  const GrownTree tb = grow_random_tree(db, schema, 7, 0, seed);
  std::vector<NodeLabel> common;
  for (int d = 0; d < 7; ++d) {
    const CountTree::Layer& la = ta.counts.layer(d);
    for (NodeLabel u : la.labels)
      if (tb.counts.stored(u)) common.push_back(u);
  }
  ASSERT_FALSE(common.empty());
  const SplitMap ra = materialize_split_rules(schema, seed, 7, common);
  const SplitMap rb = materialize_split_rules(schema, seed, 7, common);
  ASSERT_EQ(ra.size(), rb.size());
  for (const auto& [label, rule] : ra) {
    const auto it = rb.find(label);
    ASSERT_NE(it, rb.end());
    EXPECT_EQ(rule.kind, it->second.kind);
    EXPECT_EQ(rule.feature, it->second.feature);
    EXPECT_EQ(rule.threshold, it->second.threshold);
    EXPECT_EQ(rule.category, it->second.category);
  }
}

TEST(GrowRandomTree, RootHoldsAllPointsAndLayersStayAdditive) {
  const FeatureSchema schema = two_numeric_schema();
  const Dataset data = uniform_data(schema, 800, 4);
  GrowthStats stats;
  const GrownTree tree = grow_random_tree(data, schema, 10, 2, 777, &stats);
  EXPECT_EQ(tree.counts.total(), 800);
  EXPECT_NO_THROW(tree.counts.validate());
  EXPECT_GT(stats.element_moves, 0);
}

TEST(GrowRandomTree, GateStopsExpansion) {
  const FeatureSchema schema = two_numeric_schema();
  const Dataset data = uniform_data(schema, 300, 5);
  const std::int64_t gate = 50;
  const GrownTree tree = grow_random_tree(data, schema, 12, gate, 9);
  for (int d = 0; d + 1 <= 12; ++d) {
    const CountTree::Layer& l = tree.counts.layer(d);
    for (std::size_t i = 0; i < l.labels.size(); ++i) {
      if (l.counts[i] <= gate) {
        EXPECT_FALSE(tree.counts.stored(left_child(l.labels[i])));
        EXPECT_FALSE(tree.counts.stored(right_child(l.labels[i])));
      }
    }
  }
}

TEST(GrowRandomTree, SingletonChainReachesFullDepthAtGateZero) {
  const FeatureSchema schema = two_numeric_schema();
  Dataset data;
  data.num_features = 2;
  data.append_row({1.0, 1.0}, 0);
  const GrownTree tree = grow_random_tree(data, schema, 6, 0, 11);
  EXPECT_EQ(tree.counts.stored_nodes(), 7u);  // one chain, depths 0..6
  for (int d = 0; d <= 6; ++d) {
    ASSERT_EQ(tree.counts.layer(d).labels.size(), 1u);
    EXPECT_EQ(tree.counts.layer(d).counts[0], 1);
  }
}

TEST(GrowRandomTree, CategoricalExhaustionForcesLeaves) {
  const FeatureSchema schema = one_categorical_schema(3);
  const Dataset data = uniform_data(schema, 200, 6);
  GrowthStats stats;
  const GrownTree tree = grow_random_tree(data, schema, 10, 0, 13, &stats);
  EXPECT_GT(stats.forced_leaves, 0);
  // No chain can be longer than 3 splits: depth 4 and below never materialise.
  for (int d = 4; d <= 10; ++d) EXPECT_TRUE(tree.counts.layer(d).labels.empty());
}

TEST(GrowRandomTree, DegenerateNumericRangeIsUnsplittable) {
  FeatureSchema s;
  s.label_name = "y";
  s.classes = {"a", "b"};
  FeatureSpec f;
  f.name = "x";
  f.kind = FeatureKind::kNumeric;
  f.lower = 3.0;
  f.upper = 3.0;
  s.features = {f};
  Dataset data;
  data.num_features = 1;
  data.append_row({3.0}, 0);
  data.append_row({3.0}, 1);
  GrowthStats stats;
  const GrownTree tree = grow_random_tree(data, s, 5, 0, 17, &stats);
  EXPECT_EQ(tree.counts.stored_nodes(), 1u);  // root is a forced leaf
  EXPECT_EQ(stats.forced_leaves, 1);
}

TEST(GrowRandomTree, InputValidation) {
  const FeatureSchema schema = two_numeric_schema();
  const Dataset data = uniform_data(schema, 10, 7);
  EXPECT_THROW(grow_random_tree(data, schema, 0, 0, 1), std::invalid_argument);
  EXPECT_THROW(grow_random_tree(data, schema, 3, -1, 1), std::invalid_argument);
  Dataset empty;
  empty.num_features = 2;
  EXPECT_THROW(grow_random_tree(empty, schema, 3, 0, 1), std::invalid_argument);
  Dataset wrong = uniform_data(one_categorical_schema(3), 10, 8);
  EXPECT_THROW(grow_random_tree(wrong, schema, 3, 0, 1), std::invalid_argument);
}

TEST(HeavySplitRules, AgreesWithPerLabelMaterialization) {
  const FeatureSchema schema = two_numeric_schema();
  const Dataset data = uniform_data(schema, 600, 9);
  const std::uint64_t seed = 2024;
  const GrownTree tree = grow_random_tree(data, schema, 8, 0, seed);
  // Take an upward-closed subset: all stored nodes with count >= 40.
  HeavySet heavy;
  for (int d = 0; d < 8; ++d) {
    const CountTree::Layer& l = tree.counts.layer(d);
    for (std::size_t i = 0; i < l.labels.size(); ++i)
      if (l.counts[i] >= 40) heavy.insert(l.labels[i]);
  }
  ASSERT_TRUE(heavy.is_upward_closed());
  const SplitMap fast = heavy_split_rules(schema, seed, 8, heavy);
  const SplitMap slow =
      materialize_split_rules(schema, seed, 8, heavy.sorted_labels());
  ASSERT_EQ(fast.size(), slow.size());
  for (const auto& [label, rule] : fast) {
    const auto it = slow.find(label);
    ASSERT_NE(it, slow.end());
    EXPECT_EQ(rule.feature, it->second.feature);
    EXPECT_EQ(rule.threshold, it->second.threshold);
    EXPECT_EQ(rule.kind, it->second.kind);
    EXPECT_EQ(rule.category, it->second.category);
  }
}

TEST(PrunedLeaves, HandCases) {
  const FeatureSchema schema = two_numeric_schema();
  SplitMap splits;
  HeavySet heavy;
  // Nothing heavy: the root itself is the single leaf.
  EXPECT_EQ(pruned_leaves(splits, heavy), std::vector<NodeLabel>{kRootLabel});

  // Root heavy with a rule: both children are leaves.
  heavy.insert(kRootLabel);
  SplitRule r;
  r.kind = SplitKind::kNumericThreshold;
  r.feature = 0;
  r.threshold = 5.0;
  splits.emplace(kRootLabel, r);
  EXPECT_EQ(pruned_leaves(splits, heavy), (std::vector<NodeLabel>{2, 3}));

  // Left child heavy too: its children join, the right child stays.
  heavy.insert(NodeLabel{2});
  splits.emplace(NodeLabel{2}, r);
  EXPECT_EQ(pruned_leaves(splits, heavy), (std::vector<NodeLabel>{3, 4, 5}));

  // A heavy node without a rule is itself a leaf.
  HeavySet only_root;
  only_root.insert(kRootLabel);
  SplitMap no_rules;
  EXPECT_EQ(pruned_leaves(no_rules, only_root),
            std::vector<NodeLabel>{kRootLabel});
}

TEST(ResolveLeaf, DescendsWhileHeavyAndStopsAtLeaves) {
  SplitMap splits;
  HeavySet heavy;
  heavy.insert(kRootLabel);
  heavy.insert(NodeLabel{2});
  SplitRule root_rule;
  root_rule.kind = SplitKind::kNumericThreshold;
  root_rule.feature = 0;
  root_rule.threshold = 5.0;
  SplitRule left_rule = root_rule;
  left_rule.threshold = 2.0;
  splits.emplace(kRootLabel, root_rule);
  splits.emplace(NodeLabel{2}, left_rule);

  const double r1[] = {1.0};  // left, then left again
  const double r2[] = {3.0};  // left, then right
  const double r3[] = {9.0};  // straight right (non-heavy: stop)
  EXPECT_EQ(resolve_leaf(splits, heavy, 10, r1), NodeLabel{4});
  EXPECT_EQ(resolve_leaf(splits, heavy, 10, r2), NodeLabel{5});
  EXPECT_EQ(resolve_leaf(splits, heavy, 10, r3), NodeLabel{3});
  // Depth limit caps the walk.
  EXPECT_EQ(resolve_leaf(splits, heavy, 1, r1), NodeLabel{2});
  EXPECT_EQ(resolve_leaf(splits, heavy, 0, r1), kRootLabel);
}

TEST(MaterializeSplitRules, SkipsFullDepthAndBeyondForcedLeaves) {
  const FeatureSchema schema = one_categorical_schema(2);
  // Depth 6 but only 2 categories: chains force out after 2 splits, so any
  // label deeper than 2 yields nothing.
  NodeLabel deep = kRootLabel;
  for (int i = 0; i < 4; ++i) deep = left_child(deep);
  const SplitMap rules =
      materialize_split_rules(schema, 5, 6, {kRootLabel, deep});
  EXPECT_EQ(rules.count(kRootLabel), 1u);
  EXPECT_EQ(rules.count(deep), 0u);
  // Labels at the full depth carry no rule by definition.
  const SplitMap at_depth = materialize_split_rules(schema, 5, 0, {kRootLabel});
  EXPECT_TRUE(at_depth.empty());
}

}  // namespace
}  // namespace lumberjack
