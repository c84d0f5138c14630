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

// End-to-end API walkthrough: synthesize the two-moons toy, train a private
// forest at (2, 1e-6)-DP, and evaluate on a held-out split.

#include <cstdio>

#include "lumberjack/lumberjack.hpp"

int main() {
  using namespace lumberjack;

  const double f1_hi = 5.0, f2_hi = 4.0;
  const FeatureSchema schema = moons_schema(f1_hi, f2_hi);
  const Dataset all = gen_moons(10000, f1_hi, f2_hi, /*seed=*/42);

  // First 80% train, rest test; gen_moons already shuffles.
  Dataset train, test;
  train.num_features = test.num_features = 2;
  std::vector<double> cells(2);
  for (std::size_t i = 0; i < all.n; ++i) {
    cells.assign(all.row(i), all.row(i) + 2);
    (i < all.n * 8 / 10 ? train : test).append_row(cells, all.labels[i]);
  }

  TrainConfig cfg;
  cfg.trees = 25;
  cfg.depth = 100;
  cfg.budget = EpsilonDelta{2.0, 1e-6};
  cfg.seed = 42;

  TrainDiagnostics diag;
  const ForestModel model = train_forest(train, schema, cfg, &diag);

  const AccountingTranscript& a = model.accounting;
  std::printf("structure: epsilon1=%.6g delta1=%.3g sigma=%.6g gate=%.6g tau=%.6g\n",
              a.epsilon1, a.delta1, a.sigma, a.delta_gate, a.tau);
  std::printf("leaves:    epsilon2=%.6g delta2=%.3g rho/leaf=%.6g\n", a.epsilon2,
              a.delta2, a.rho_per_leaf);

  std::size_t total_leaves = 0;
  for (std::size_t v : diag.leaf_counts) total_leaves += v;
  std::printf("forest:    %zu trees, %zu leaves total\n", model.trees.size(),
              total_leaves);

  const EvalResult r = evaluate(model, test);
  std::printf("test accuracy: %.4f on %zu rows\n", r.accuracy, r.n);
  return 0;
}
