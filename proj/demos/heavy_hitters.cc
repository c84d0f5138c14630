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

// Heavy-hitter detection on a hand-built 7-node tree, noiseless and noisy.
// Shows how few oracle calls the recursive pass needs compared to the
// top-down baseline.

#include <cstdio>

#include "lumberjack/lumberjack.hpp"

int main() {
  using namespace lumberjack;

  // Height 3, leaf counts (4, 0, 1, 0): total 5, everything on the left.
  const CountTree tree = CountTree::from_leaf_counts(
      3, {{NodeLabel{4}, 4}, {NodeLabel{6}, 1}});

  ThresholdOracleConfig noiseless;
  noiseless.sigma = 0.0;  // dedicated exact mode
  noiseless.tau = 2.0;
  noiseless.delta_gate = 1.0;

  RngStream rng = derive_stream(7, {1});
  std::vector<QueryRecord> log;
  const HeavySet heavy = mark_heavy_hitters(tree, 3, noiseless, rng, &log);

  std::printf("noiseless heavy set (tau=2):\n%s",
              dump_heavy(tree, heavy).c_str());
  std::printf("oracle calls: %zu (budget per datapoint path: %lld)\n", log.size(),
              static_cast<long long>(query_budget(1, 3)));

  // The same tree under real noise, calibrated for a forest of one tree.
  const CalibrationResult cal = calibrate_tight(0.9, 1e-6, query_budget(1, 3));
  ThresholdOracleConfig noisy;
  noisy.sigma = cal.sigma;
  noisy.tau = 1.0 + cal.delta_gate;
  noisy.delta_gate = cal.delta_gate;

  RngStream rng2 = derive_stream(7, {2});
  const HeavySet noisy_heavy = mark_heavy_hitters(tree, 3, noisy, rng2);
  std::printf("noisy run: sigma=%.3f gate=%.3f -> %zu heavy nodes\n", cal.sigma,
              cal.delta_gate, noisy_heavy.size());
  return 0;
}
