// Copyright 2026 The dp-lumberjack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lumberjack/count_tree.hpp"
#include "lumberjack/dataset.hpp"
#include "lumberjack/rng.hpp"
#include "lumberjack/schema.hpp"

namespace lumberjack {

// Schema for the two-moons toy: two numeric features bounded below by zero,
// a three-class color label.
inline FeatureSchema moons_schema(double f1_hi, double f2_hi) {
  if (!(f1_hi > 0.0) || !(f2_hi > 0.0))
    throw std::invalid_argument("moons_schema: bounds must be positive");
  FeatureSchema s;
  s.features.push_back(FeatureSpec{"f1", FeatureKind::kNumeric, 0.0, f1_hi, {}});
  s.features.push_back(FeatureSpec{"f2", FeatureKind::kNumeric, 0.0, f2_hi, {}});
  s.label_name = "color";
  s.classes = {"red", "blue", "green"};
  return s;
}

namespace detail {

inline constexpr std::uint64_t kMoonsTag = 0x6d6f6f6e73;  // "moons"

inline double clamp_to(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace detail

// Two interleaving unit half-circles plus a far outlier blob. Class shares
// are 55% red (upper moon), 40% blue (lower moon), and the remainder green
// (outlier blob centered at distance 1 from the upper bound of both
// features, standard deviation 0.3). The moons are offset to be non-negative
// and carry Gaussian jitter 0.1; all coordinates are clamped into
// [0, f1_hi] x [0, f2_hi]. Rows come out shuffled.
inline Dataset gen_moons(std::int64_t n, double f1_hi, double f2_hi,
                         std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_moons: n must be >= 1");
  if (!(f1_hi > 0.0) || !(f2_hi > 0.0))
    throw std::invalid_argument("gen_moons: bounds must be positive");
  const auto n_red = static_cast<std::int64_t>(std::llround(0.55 * static_cast<double>(n)));
  const auto n_blue = static_cast<std::int64_t>(std::llround(0.40 * static_cast<double>(n)));
  const std::int64_t n_green = n - n_red - n_blue;
  if (n_green < 0) throw std::invalid_argument("gen_moons: n too small to partition");

  RngStream rng = derive_stream(seed, {detail::kMoonsTag});
  Dataset data;
  data.num_features = 2;
  const double jitter = 0.1;
  std::vector<double> row(2);
  const auto push = [&](double x, double y, int cls) {
    row[0] = detail::clamp_to(x, 0.0, f1_hi);
    row[1] = detail::clamp_to(y, 0.0, f2_hi);
    data.append_row(row, cls);
  };
  for (std::int64_t i = 0; i < n_red; ++i) {
    const double theta = rng.uniform(0.0, std::numbers::pi);
    push(std::cos(theta) + 1.5 + rng.gaussian(jitter),
         std::sin(theta) + 1.0 + rng.gaussian(jitter), 0);
  }
  for (std::int64_t i = 0; i < n_blue; ++i) {
    const double theta = rng.uniform(0.0, std::numbers::pi);
    push(1.0 - std::cos(theta) + 1.5 + rng.gaussian(jitter),
         0.5 - std::sin(theta) + 1.0 + rng.gaussian(jitter), 1);
  }
  for (std::int64_t i = 0; i < n_green; ++i) {
    push(f1_hi - 1.0 + rng.gaussian(0.3), f2_hi - 1.0 + rng.gaussian(0.3), 2);
  }

  // Fisher-Yates over rows.
  for (std::size_t i = data.n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::uint64_t>(i)));
    if (j + 1 == i) continue;
    for (std::size_t f = 0; f < 2; ++f)
      std::swap(data.values[(i - 1) * 2 + f], data.values[j * 2 + f]);
    std::swap(data.labels[i - 1], data.labels[j]);
  }
  return data;
}

namespace detail {

// Sum of c Bernoulli(p) draws. Exact and stream-deterministic; counts here
// are small enough that the linear cost never matters.
inline std::int64_t binomial_by_trials(std::int64_t c, double p, RngStream& rng) {
  std::int64_t k = 0;
  for (std::int64_t i = 0; i < c; ++i)
    if (rng.uniform() < p) ++k;
  return k;
}

struct TreeGenFrame {
  NodeLabel label;
  int depth;
  std::int64_t count;
};

template <typename LeftProbFn>
CountTree generate_count_tree(int height, std::int64_t n, RngStream& rng,
                              LeftProbFn&& left_prob) {
  if (height < 1) throw std::invalid_argument("generate_count_tree: height must be >= 1");
  if (n < 1) throw std::invalid_argument("generate_count_tree: n must be >= 1");
  // DFS so that each layer fills in ascending label order.
  std::vector<std::pair<NodeLabel, std::int64_t>> leaves;
  std::vector<TreeGenFrame> stack{{kRootLabel, 0, n}};
  while (!stack.empty()) {
    const TreeGenFrame f = stack.back();
    stack.pop_back();
    if (f.depth == height - 1) {
      leaves.emplace_back(f.label, f.count);
      continue;
    }
    const double p = left_prob(f.label, f.depth);
    const std::int64_t left = binomial_by_trials(f.count, p, rng);
    const std::int64_t right = f.count - left;
    // Right pushed first so the left subtree is expanded first.
    if (right > 0) stack.push_back({right_child(f.label), f.depth + 1, right});
    if (left > 0) stack.push_back({left_child(f.label), f.depth + 1, left});
  }
  return CountTree::from_leaf_counts(height, leaves);
}

}  // namespace detail

// Random sparse count tree: every internal node splits its count by a
// Bernoulli sum whose bias is itself drawn from U(0.1, 0.9), giving counts
// that vary across all scales. Only non-empty nodes are materialised.
inline CountTree random_count_tree(int height, std::int64_t n, RngStream& rng) {
  return detail::generate_count_tree(
      height, n, rng, [&](NodeLabel, int) { return rng.uniform(0.1, 0.9); });
}

inline CountTree random_count_tree(int height, std::int64_t n, std::uint64_t seed) {
  RngStream rng = derive_stream(seed, {0x74726565, static_cast<std::uint64_t>(height)});
  return random_count_tree(height, n, rng);
}

// Path-skewed tree: nodes on the leftmost spine keep `keep` of their mass on
// the spine, everything else splits evenly. Spine counts decay geometrically,
// so counts near any threshold appear at predictable depths; useful for
// detector error benchmarks.
inline CountTree path_skewed_tree(int height, std::int64_t n, double keep,
                                  std::uint64_t seed) {
  if (!(keep > 0.0) || !(keep < 1.0))
    throw std::invalid_argument("path_skewed_tree: keep must lie in (0, 1)");
  RngStream rng = derive_stream(seed, {0x70617468, static_cast<std::uint64_t>(height)});
  return detail::generate_count_tree(
      height, n, rng, [&](NodeLabel label, int depth) {
        const bool on_spine = label == (kRootLabel << depth);
        return on_spine ? keep : 0.5;
      });
}

}  // namespace lumberjack
