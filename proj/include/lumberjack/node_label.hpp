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

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lumberjack/rng.hpp"

namespace lumberjack {

// Heap-style node label in the conceptual complete binary tree: root is 1,
// children of i are 2i and 2i+1, depth(i) = floor(log2 i). Trees up to depth
// ~120 need labels wider than 64 bits, hence the 128-bit representation.
using NodeLabel = unsigned __int128;

inline constexpr NodeLabel kRootLabel = 1;

inline int label_depth(NodeLabel v) {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) return 127 - std::countl_zero(hi);
  return 63 - std::countl_zero(static_cast<std::uint64_t>(v));
}

inline NodeLabel left_child(NodeLabel v) { return v << 1; }
inline NodeLabel right_child(NodeLabel v) { return (v << 1) | 1; }
inline NodeLabel parent_label(NodeLabel v) { return v >> 1; }

// First label of the depth-d layer inside the subtree rooted at v, where d is
// relative to v. The layer occupies [v << d, (v+1) << d).
inline NodeLabel layer_begin(NodeLabel v, int d) { return v << d; }
inline NodeLabel layer_end(NodeLabel v, int d) { return (v + 1) << d; }

// True when a is an ancestor of b or equal to it.
inline bool is_ancestor_or_self(NodeLabel a, NodeLabel b) {
  const int da = label_depth(a);
  const int db = label_depth(b);
  if (da > db) return false;
  return (b >> (db - da)) == a;
}

inline std::string label_to_string(NodeLabel v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return std::string(s.rbegin(), s.rend());
}

inline NodeLabel label_from_string(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty node label");
  NodeLabel v = 0;
  for (char c : s) {
    if (c < '0' || c > '9')
      throw std::invalid_argument("malformed node label: " + std::string(s));
    const NodeLabel prev = v;
    v = v * 10 + static_cast<unsigned>(c - '0');
    if (v < prev) throw std::invalid_argument("node label overflow");
  }
  return v;
}

struct NodeLabelHash {
  std::size_t operator()(NodeLabel v) const {
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    const auto lo = static_cast<std::uint64_t>(v);
    return static_cast<std::size_t>(mix64(lo ^ mix64(hi)));
  }
};

}  // namespace lumberjack
