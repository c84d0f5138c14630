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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lumberjack/datagen.hpp"
#include "lumberjack/forest.hpp"
#include "lumberjack/hh.hpp"
#include "lumberjack/text_io.hpp"
#include "lumberjack/threshold.hpp"

namespace lumberjack {

// Benchmark CSV headers are a stable external interface; tests pin them.
inline constexpr char kHhBenchHeader[] =
    "method,h,rho,tau,sigma,noise_ratio,seed,trial,misclassified,max_margin,"
    "wall_time_s";
inline constexpr char kForestBenchHeader[] =
    "method,f1_hi,f2_hi,n,epsilon,delta,epsilon1,trees,depth,seed,accuracy,"
    "wall_time_s";
inline constexpr char kCalibrateBenchHeader[] =
    "mode,epsilon,delta,m,sigma,delta_gate,achieved_delta";

namespace detail {

// Runs fn(0..items-1) across up to `threads` workers; items are independent.
inline void parallel_for(std::size_t items, int threads,
                         const std::function<void(std::size_t)>& fn) {
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(items)));
  if (workers == 1) {
    for (std::size_t i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::atomic<bool> failed{false};
  std::vector<std::string> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= items) return;
          fn(i);
        }
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(w)] = e.what();
        failed.store(true);
        next.store(items);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load())
    for (const auto& msg : errors)
      if (!msg.empty()) throw std::runtime_error("bench worker: " + msg);
}

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Largest |count - tau| over nodes classified differently from the exact
// heavy set; 0 when the detection is exact.
inline std::pair<std::size_t, double> misclassification_margin(
    const CountTree& tree, int h, double tau, const HeavySet& detected,
    const HeavySet& exact) {
  std::size_t wrong = 0;
  double margin = 0.0;
  const auto visit = [&](NodeLabel u) {
    ++wrong;
    margin =
        std::max(margin, std::abs(static_cast<double>(tree.count_at(u)) - tau));
  };
  for (int d = 0; d < h; ++d) {
    const CountTree::Layer& l = tree.layer(d);
    for (NodeLabel u : l.labels)
      if (detected.contains(u) != exact.contains(u)) visit(u);
  }
  return {wrong, margin};
}

}  // namespace detail

struct HhBenchConfig {
  std::vector<int> heights{8, 16, 32, 64};
  std::int64_t n = 400;
  double rho = 0.5;
  double tau = 20.0;
  int trials = 100;
  std::uint64_t seed = 7;
  bool timing = true;
  int threads = 1;
  std::string dump_dir;  // when non-empty, heavy dumps are written per run
};

// Detector vs top-down baseline at matched zCDP rho on path-skewed trees.
// The detector spreads rho over 1+floor(log2 h) queries per datapoint, the
// baseline over h, hence the analytic noise-scale ratio column.
inline std::string bench_hh_csv(const HhBenchConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("bench hh: trials must be >= 1");
  if (!(cfg.rho > 0.0)) throw std::invalid_argument("bench hh: rho must be positive");
  if (!(cfg.tau >= 1.0))
    throw std::invalid_argument("bench hh: tau must be >= 1 for the skip-empty pass");
  for (int h : cfg.heights)
    if (h < 1) throw std::invalid_argument("bench hh: heights must be >= 1");

  const std::size_t runs = cfg.heights.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::string> rows(runs);

  detail::parallel_for(runs, cfg.threads, [&](std::size_t i) {
    const int h = cfg.heights[i / static_cast<std::size_t>(cfg.trials)];
    const int trial = static_cast<int>(i % static_cast<std::size_t>(cfg.trials));
    const std::uint64_t tree_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(h),
                               static_cast<std::uint64_t>(trial)});
    const CountTree tree = path_skewed_tree(h, cfg.n, 0.85, tree_seed);
    const HeavySet exact = brute_force_heavy(tree, h, cfg.tau);

    const auto queries_per_point = static_cast<double>(query_budget(1, h));
    const double sigma_det = std::sqrt(queries_per_point / (2.0 * cfg.rho));
    const double sigma_base = std::sqrt(static_cast<double>(h) / (2.0 * cfg.rho));
    const double noise_ratio = sigma_base / sigma_det;

    std::string out;
    for (int method = 0; method < 2; ++method) {
      const bool is_detector = method == 0;
      RngStream rng = derive_stream(
          tree_seed, {is_detector ? 0x646574u : 0x62617365u});
      detail::WallClock clock;
      HeavySet detected;
      if (is_detector) {
        ThresholdOracleConfig oracle;
        oracle.sigma = sigma_det;
        oracle.tau = cfg.tau;
        oracle.delta_gate = 0.0;
        detected = mark_heavy_hitters(tree, h, oracle, rng);
      } else {
        detected = baseline_topdown(tree, h, cfg.tau, cfg.rho, rng);
      }
      const double wall = cfg.timing ? clock.seconds() : 0.0;
      const auto [wrong, margin] =
          detail::misclassification_margin(tree, h, cfg.tau, detected, exact);
      if (!cfg.dump_dir.empty()) {
        write_text_file(cfg.dump_dir + "/hh_" +
                            (is_detector ? std::string("detector")
                                         : std::string("baseline")) +
                            "_h" + std::to_string(h) + "_t" +
                            std::to_string(trial) + ".tsv",
                        dump_heavy(tree, detected));
      }
      out += is_detector ? "detector," : "baseline,";
      out += std::to_string(h) + "," + format_double(cfg.rho) + "," +
             format_double(cfg.tau) + "," +
             format_double(is_detector ? sigma_det : sigma_base) + "," +
             format_double(noise_ratio) + "," + std::to_string(cfg.seed) + "," +
             std::to_string(trial) + "," + std::to_string(wrong) + "," +
             format_double(margin) + "," + format_double(wall) + "\n";
    }
    rows[i] = std::move(out);
  });

  std::string csv = std::string(kHhBenchHeader) + "\n";
  for (const std::string& r : rows) csv += r;
  return csv;
}

struct ForestBenchConfig {
  std::vector<std::pair<double, double>> grids{{5, 4}, {50, 40}, {5000, 4000}};
  std::int64_t n = 10000;
  double epsilon = 2.0;
  double delta = 1e-6;
  int trees = 25;
  int depth = 100;
  double structure_fraction = 0.75;
  int seeds = 5;
  std::uint64_t seed0 = 1;
  double test_fraction = 0.2;
  bool timing = true;
  int threads = 1;
};

// Two-moons toy accuracy sweep across bound grids and seeds. The majority
// rows report the train-majority-class baseline on the same test split.
inline std::string bench_forest_csv(const ForestBenchConfig& cfg) {
  if (cfg.seeds < 1) throw std::invalid_argument("bench forest: seeds must be >= 1");
  if (cfg.n < 10) throw std::invalid_argument("bench forest: n must be >= 10");
  if (!(cfg.test_fraction > 0.0) || !(cfg.test_fraction < 1.0))
    throw std::invalid_argument("bench forest: test fraction must lie in (0, 1)");
  for (const auto& [f1, f2] : cfg.grids)
    if (!(f1 > 0.0) || !(f2 > 0.0))
      throw std::invalid_argument("bench forest: bounds must be positive");

  const std::size_t runs = cfg.grids.size() * static_cast<std::size_t>(cfg.seeds);
  std::vector<std::string> rows(runs);

  detail::parallel_for(runs, cfg.threads, [&](std::size_t i) {
    const auto [f1_hi, f2_hi] = cfg.grids[i / static_cast<std::size_t>(cfg.seeds)];
    const std::uint64_t seed =
        cfg.seed0 + i % static_cast<std::size_t>(cfg.seeds);

    const FeatureSchema schema = moons_schema(f1_hi, f2_hi);
    const Dataset all = gen_moons(cfg.n, f1_hi, f2_hi, seed);
    const std::size_t n_test =
        static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(all.n)));
    const std::size_t n_train = all.n - n_test;
    Dataset train, test;
    train.num_features = test.num_features = all.num_features;
    std::vector<double> cells(2);
    for (std::size_t r = 0; r < all.n; ++r) {
      cells.assign(all.row(r), all.row(r) + 2);
      (r < n_train ? train : test).append_row(cells, all.labels[r]);
    }

    TrainConfig tc;
    tc.trees = cfg.trees;
    tc.depth = cfg.depth;
    tc.budget = EpsilonDelta{cfg.epsilon, cfg.delta};
    tc.structure_fraction = cfg.structure_fraction;
    tc.seed = seed;
    tc.num_threads = 1;  // the sweep itself owns the parallelism
    detail::WallClock clock;
    const ForestModel model = train_forest(train, schema, tc);
    const double wall = cfg.timing ? clock.seconds() : 0.0;
    const double acc = evaluate(model, test).accuracy;

    std::vector<std::int64_t> class_counts(schema.num_classes(), 0);
    for (int lab : train.labels) class_counts[static_cast<std::size_t>(lab)] += 1;
    const int majority = static_cast<int>(
        std::max_element(class_counts.begin(), class_counts.end()) -
        class_counts.begin());
    std::size_t hits = 0;
    for (int lab : test.labels)
      if (lab == majority) ++hits;
    const double base_acc =
        static_cast<double>(hits) / static_cast<double>(test.labels.size());

    const std::string shared = format_double(f1_hi) + "," + format_double(f2_hi) +
                               "," + std::to_string(cfg.n) + "," +
                               format_double(cfg.epsilon) + "," +
                               format_double(cfg.delta) + "," +
                               format_double(model.accounting.epsilon1) + "," +
                               std::to_string(cfg.trees) + "," +
                               std::to_string(cfg.depth) + "," +
                               std::to_string(seed) + ",";
    rows[i] = "lumberjack," + shared + format_double(acc) + "," +
              format_double(cfg.timing ? wall : 0.0) + "\n" + "majority," +
              shared + format_double(base_acc) + "," + format_double(0.0) + "\n";
  });

  std::string csv = std::string(kForestBenchHeader) + "\n";
  for (const std::string& r : rows) csv += r;
  return csv;
}

struct CalibrateBenchConfig {
  std::vector<double> epsilons{0.5};
  std::vector<double> deltas{1e-6};
  std::vector<std::int64_t> ms{1};
  std::string mode = "simple";  // simple | tight | both
};

// Calibration tables for a flag-given grid. Pure numeric evaluation, no RNG.
inline std::string bench_calibrate_csv(const CalibrateBenchConfig& cfg) {
  std::vector<std::string> modes;
  if (cfg.mode == "simple" || cfg.mode == "both") modes.emplace_back("simple");
  if (cfg.mode == "tight" || cfg.mode == "both") modes.emplace_back("tight");
  if (modes.empty())
    throw std::invalid_argument("bench calibrate: mode must be simple, tight, or both");

  std::string csv = std::string(kCalibrateBenchHeader) + "\n";
  for (const std::string& mode : modes) {
    for (double eps : cfg.epsilons) {
      for (double delta : cfg.deltas) {
        for (std::int64_t m : cfg.ms) {
          const CalibrationResult r = mode == "simple"
                                          ? calibrate_simple(eps, delta, m)
                                          : calibrate_tight(eps, delta, m);
          csv += mode + "," + format_double(eps) + "," + format_double(delta) +
                 "," + std::to_string(m) + "," + format_double(r.sigma) + "," +
                 format_double(r.delta_gate) + "," +
                 format_double(r.achieved_delta) + "\n";
        }
      }
    }
  }
  return csv;
}

}  // namespace lumberjack
