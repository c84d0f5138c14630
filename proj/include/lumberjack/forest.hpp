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
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <tuple>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lumberjack/dataset.hpp"
#include "lumberjack/errors.hpp"
#include "lumberjack/hh.hpp"
#include "lumberjack/node_label.hpp"
#include "lumberjack/privacy.hpp"
#include "lumberjack/rng.hpp"
#include "lumberjack/schema.hpp"
#include "lumberjack/text_io.hpp"
#include "lumberjack/threshold.hpp"
#include "lumberjack/tree_builder.hpp"

namespace lumberjack {

enum class Aggregation { kMajority, kSoft };

struct TrainConfig {
  int trees = 30;
  int depth = 100;
  EpsilonDelta budget{1.0, 1e-6};
  double structure_fraction = 0.75;  // share of epsilon spent on structure
  double delta_split = 0.5;          // share of delta spent on structure
  std::optional<double> tau_override;  // must be >= 1 + delta_gate
  ThresholdVariant oracle_variant = ThresholdVariant::kOneSided;
  LeafMechanism leaf_mechanism = LeafMechanism::kExponentialMajority;
  Aggregation aggregation = Aggregation::kMajority;
  std::uint64_t seed = 1;
  int num_threads = 0;  // 0: DP_LUMBERJACK_THREADS env var, then hardware

  void validate() const {
    if (trees < 1) throw std::invalid_argument("TrainConfig: trees must be >= 1");
    if (depth < 1) throw std::invalid_argument("TrainConfig: depth must be >= 1");
    budget.validate();
    if (!(structure_fraction > 0.0) || !(structure_fraction < 1.0))
      throw std::invalid_argument("TrainConfig: structure_fraction must lie in (0, 1)");
    if (!(delta_split > 0.0) || !(delta_split < 1.0))
      throw std::invalid_argument("TrainConfig: delta_split must lie in (0, 1)");
  }
};

// Every number that entered the privacy analysis, kept with the model.
struct AccountingTranscript {
  double epsilon = 0.0;
  double delta = 0.0;
  double epsilon1 = 0.0;  // structure
  double delta1 = 0.0;
  double epsilon2 = 0.0;  // leaves
  double delta2 = 0.0;
  std::int64_t m = 0;  // joint query budget across the forest
  double sigma = 0.0;
  double delta_gate = 0.0;
  double tau = 0.0;
  double rho_total = 0.0;
  double rho_per_leaf = 0.0;
  double achieved_structure_delta = 0.0;
  ThresholdVariant oracle_variant = ThresholdVariant::kOneSided;
  double structure_fraction = 0.0;
  double delta_split = 0.0;
};

struct LeafPredictor {
  // kExponentialMajority stores a class vote; kGaussianCounts a distribution.
  int vote = -1;
  std::vector<double> distribution;
};

struct TreeModel {
  // Rules are kept only for nodes that survived pruning and still route.
  SplitMap splits;
  HeavySet heavy;
  std::map<NodeLabel, LeafPredictor> leaves;
};

struct ForestModel {
  int version = 1;
  std::uint64_t seed = 0;
  FeatureSchema schema;
  int depth = 0;
  Aggregation aggregation = Aggregation::kMajority;
  LeafMechanism leaf_mechanism = LeafMechanism::kExponentialMajority;
  AccountingTranscript accounting;
  std::vector<TreeModel> trees;
};

struct TrainDiagnostics {
  std::vector<std::size_t> leaf_assignments;  // per tree; each must equal n
  std::vector<std::size_t> heavy_sizes;
  std::vector<std::size_t> leaf_counts;  // pruned leaves per tree
  std::vector<std::size_t> forced_leaves;
};

namespace detail {

inline constexpr std::uint64_t kGrowTag = 0x67726f77;  // "grow"
inline constexpr std::uint64_t kMarkTag = 0x6d61726b;  // "mark"
inline constexpr std::uint64_t kLeafTag = 0x6c656166;  // "leaf"

// Splits total into fraction*total and the remainder such that the two parts
// sum back to total bit-exactly.
inline std::pair<double, double> split_budget_exact(double total, double fraction) {
  double a = fraction * total;
  double b = total - a;
  for (int it = 0; it < 4 && a + b != total; ++it) {
    a = total - b;
    b = total - a;
  }
  if (a + b != total || !(a > 0.0) || !(b > 0.0))
    throw BudgetError("budget split failed to partition the total exactly");
  return {a, b};
}

inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DP_LUMBERJACK_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace detail

// Trains one tree end to end: grow, mark, prune, privatize leaves. All
// randomness comes from streams derived from (seed, tree index), so the
// result does not depend on scheduling.
inline TreeModel train_single_tree(const Dataset& data, const FeatureSchema& schema,
                                   const TrainConfig& cfg,
                                   const AccountingTranscript& acct, int tree_index,
                                   TrainDiagnostics* diag = nullptr) {
  const std::uint64_t ti = static_cast<std::uint64_t>(tree_index);
  const std::uint64_t tree_seed = derive_seed(cfg.seed, {detail::kGrowTag, ti});

  GrowthStats gstats;
  const std::int64_t gate =
      static_cast<std::int64_t>(std::floor(acct.tau - acct.delta_gate - 1.0));
  GrownTree grown = grow_random_tree(data, schema, cfg.depth,
                                     std::max<std::int64_t>(gate, 0), tree_seed,
                                     &gstats);

  ThresholdOracleConfig oracle;
  oracle.sigma = acct.sigma;
  oracle.tau = acct.tau;
  oracle.delta_gate = acct.delta_gate;
  oracle.variant = acct.oracle_variant;
  RngStream mark_rng = derive_stream(cfg.seed, {detail::kMarkTag, ti});
  HeavySet heavy = mark_heavy_hitters(grown.counts, cfg.depth, oracle, mark_rng);

  // The pruned tree only ever consults rules at marked nodes; re-derive
  // exactly those instead of having growth store one per materialised node.
  SplitMap splits = heavy_split_rules(schema, tree_seed, cfg.depth, heavy);

  const std::vector<NodeLabel> leaves = pruned_leaves(splits, heavy);

  // Class histograms per leaf; every point lands in exactly one leaf.
  std::map<NodeLabel, std::vector<std::int64_t>> hist;
  const std::size_t num_classes = schema.num_classes();
  for (NodeLabel leaf : leaves) hist.emplace(leaf, std::vector<std::int64_t>(num_classes, 0));
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const NodeLabel leaf = resolve_leaf(splits, heavy, cfg.depth, data.row(i));
    auto it = hist.find(leaf);
    if (it == hist.end())
      throw std::logic_error("training point resolved to a label outside the leaf set");
    it->second[static_cast<std::size_t>(data.labels[i])] += 1;
    ++assigned;
  }

  TreeModel out;
  out.heavy = std::move(heavy);
  out.splits = std::move(splits);
  for (const auto& [leaf, counts] : hist) {
    RngStream leaf_rng = derive_stream(
        cfg.seed, {detail::kLeafTag, ti, static_cast<std::uint64_t>(leaf >> 64),
                   static_cast<std::uint64_t>(leaf)});
    LeafPredictor p;
    if (cfg.leaf_mechanism == LeafMechanism::kExponentialMajority) {
      p.vote = static_cast<int>(
          exp_mech_select(counts, exp_mech_epsilon_for(acct.rho_per_leaf), leaf_rng));
    } else {
      p.distribution =
          gaussian_leaf_counts(counts, cfg.trees, acct.rho_total, leaf_rng);
    }
    out.leaves.emplace(leaf, std::move(p));
  }

  if (diag && static_cast<std::size_t>(tree_index) < diag->leaf_assignments.size()) {
    diag->leaf_assignments[static_cast<std::size_t>(tree_index)] = assigned;
    diag->heavy_sizes[static_cast<std::size_t>(tree_index)] = out.heavy.size();
    diag->leaf_counts[static_cast<std::size_t>(tree_index)] = leaves.size();
    diag->forced_leaves[static_cast<std::size_t>(tree_index)] = gstats.forced_leaves;
  }
  return out;
}

inline ForestModel train_forest(const Dataset& data, const FeatureSchema& schema,
                                const TrainConfig& cfg,
                                TrainDiagnostics* diag = nullptr) {
  cfg.validate();
  schema.validate();
  if (data.n == 0) throw DataError("train_forest: empty training set");
  if (data.labels.size() != data.n)
    throw DataError("train_forest: training data must carry labels");
  if (data.num_features != schema.num_features())
    throw SchemaError("train_forest: dataset does not match the schema");

  AccountingTranscript acct;
  acct.epsilon = cfg.budget.epsilon;
  acct.delta = cfg.budget.delta;
  acct.oracle_variant = cfg.oracle_variant;
  acct.structure_fraction = cfg.structure_fraction;
  acct.delta_split = cfg.delta_split;
  std::tie(acct.epsilon1, acct.epsilon2) =
      detail::split_budget_exact(cfg.budget.epsilon, cfg.structure_fraction);
  std::tie(acct.delta1, acct.delta2) =
      detail::split_budget_exact(cfg.budget.delta, cfg.delta_split);

  acct.m = query_budget(cfg.trees, cfg.depth);
  const CalibrationResult cal =
      cfg.oracle_variant == ThresholdVariant::kOneSided
          ? calibrate_tight(acct.epsilon1, acct.delta1, acct.m)
          : calibrate_two_sided(acct.epsilon1, acct.delta1, acct.m);
  acct.sigma = cal.sigma;
  acct.delta_gate = cal.delta_gate;
  acct.achieved_structure_delta = cal.achieved_delta;
  if (!(acct.achieved_structure_delta <= acct.delta1))
    throw std::logic_error("calibration exceeded the structure delta budget");

  acct.tau = cfg.tau_override ? *cfg.tau_override : 1.0 + acct.delta_gate;
  if (!(acct.tau >= 1.0 + acct.delta_gate))
    throw std::invalid_argument("train_forest: tau must be >= 1 + delta_gate");

  acct.rho_total = max_rho_for(EpsilonDelta{acct.epsilon2, acct.delta2}).rho;
  acct.rho_per_leaf = acct.rho_total / static_cast<double>(cfg.trees);

  ForestModel model;
  model.seed = cfg.seed;
  model.schema = schema;
  model.depth = cfg.depth;
  model.aggregation = cfg.aggregation;
  model.leaf_mechanism = cfg.leaf_mechanism;
  model.accounting = acct;
  model.trees.resize(static_cast<std::size_t>(cfg.trees));

  if (diag) {
    const auto k = static_cast<std::size_t>(cfg.trees);
    diag->leaf_assignments.assign(k, 0);
    diag->heavy_sizes.assign(k, 0);
    diag->leaf_counts.assign(k, 0);
    diag->forced_leaves.assign(k, 0);
  }

  const int threads =
      std::min(detail::resolve_thread_count(cfg.num_threads), cfg.trees);
  if (threads <= 1) {
    for (int i = 0; i < cfg.trees; ++i)
      model.trees[static_cast<std::size_t>(i)] =
          train_single_tree(data, schema, cfg, acct, i, diag);
  } else {
    std::atomic<int> next{0};
    std::vector<std::string> errors(static_cast<std::size_t>(threads));
    auto worker = [&](int slot) {
      try {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= cfg.trees) return;
          model.trees[static_cast<std::size_t>(i)] =
              train_single_tree(data, schema, cfg, acct, i, diag);
        }
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(slot)] = e.what();
        next.store(cfg.trees);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
    for (const auto& msg : errors)
      if (!msg.empty()) throw std::runtime_error("train_forest worker: " + msg);
  }
  return model;
}

// Tree-level class choice for one row.
inline int tree_vote(const TreeModel& tree, const ForestModel& model,
                     const double* row) {
  const NodeLabel leaf = resolve_leaf(tree.splits, tree.heavy, model.depth, row);
  auto it = tree.leaves.find(leaf);
  if (it == tree.leaves.end())
    throw DataError("model is missing a predictor for a reachable leaf");
  const LeafPredictor& p = it->second;
  if (model.leaf_mechanism == LeafMechanism::kExponentialMajority) return p.vote;
  const auto& d = p.distribution;
  return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

// Mean per-class score across trees. Vote predictors contribute one-hot rows.
inline std::vector<double> predict_distribution(const ForestModel& model,
                                                const double* row) {
  const std::size_t c = model.schema.num_classes();
  std::vector<double> acc(c, 0.0);
  for (const TreeModel& tree : model.trees) {
    const NodeLabel leaf = resolve_leaf(tree.splits, tree.heavy, model.depth, row);
    auto it = tree.leaves.find(leaf);
    if (it == tree.leaves.end())
      throw DataError("model is missing a predictor for a reachable leaf");
    const LeafPredictor& p = it->second;
    if (model.leaf_mechanism == LeafMechanism::kExponentialMajority) {
      acc[static_cast<std::size_t>(p.vote)] += 1.0;
    } else {
      for (std::size_t j = 0; j < c; ++j) acc[j] += p.distribution[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(model.trees.size());
  for (double& v : acc) v *= inv;
  return acc;
}

// Ties resolve to the lowest class index.
inline int predict_row(const ForestModel& model, const double* row) {
  if (model.trees.empty()) throw DataError("predict: model has no trees");
  if (model.aggregation == Aggregation::kMajority) {
    std::vector<std::int64_t> votes(model.schema.num_classes(), 0);
    for (const TreeModel& tree : model.trees)
      votes[static_cast<std::size_t>(tree_vote(tree, model, row))] += 1;
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) -
                            votes.begin());
  }
  const std::vector<double> d = predict_distribution(model, row);
  return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

inline std::vector<int> predict(const ForestModel& model, const Dataset& data) {
  if (data.num_features != model.schema.num_features())
    throw SchemaError("predict: dataset does not match the model schema");
  std::vector<int> out;
  out.reserve(data.n);
  for (std::size_t i = 0; i < data.n; ++i)
    out.push_back(predict_row(model, data.row(i)));
  return out;
}

struct EvalResult {
  double accuracy = 0.0;
  std::size_t n = 0;
  std::vector<std::vector<std::int64_t>> confusion;  // [true][predicted]
};

inline EvalResult evaluate(const ForestModel& model, const Dataset& data) {
  if (data.n == 0) throw DataError("evaluate: empty evaluation set");
  if (data.labels.size() != data.n)
    throw DataError("evaluate: evaluation data must carry labels");
  const std::vector<int> preds = predict(model, data);
  EvalResult r;
  r.n = data.n;
  const std::size_t c = model.schema.num_classes();
  r.confusion.assign(c, std::vector<std::int64_t>(c, 0));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const auto t = static_cast<std::size_t>(data.labels[i]);
    const auto p = static_cast<std::size_t>(preds[i]);
    r.confusion[t][p] += 1;
    if (t == p) ++hits;
  }
  r.accuracy = static_cast<double>(hits) / static_cast<double>(data.n);
  return r;
}

// ---------------------------------------------------------------------------
// Serialization. Text format, fully sorted, so equal models produce equal
// bytes. Doubles go through shortest-round-trip formatting.

namespace detail {

inline const char* variant_name(ThresholdVariant v) {
  return v == ThresholdVariant::kOneSided ? "one_sided" : "two_sided";
}

inline ThresholdVariant variant_from(std::string_view s) {
  if (s == "one_sided") return ThresholdVariant::kOneSided;
  if (s == "two_sided") return ThresholdVariant::kTwoSided;
  throw DataError("model file: unknown oracle variant");
}

inline const char* mechanism_name(LeafMechanism m) {
  return m == LeafMechanism::kExponentialMajority ? "exponential_majority"
                                                  : "gaussian_counts";
}

inline LeafMechanism mechanism_from(std::string_view s) {
  if (s == "exponential_majority") return LeafMechanism::kExponentialMajority;
  if (s == "gaussian_counts") return LeafMechanism::kGaussianCounts;
  throw DataError("model file: unknown leaf mechanism");
}

inline const char* aggregation_name(Aggregation a) {
  return a == Aggregation::kMajority ? "majority" : "soft";
}

inline Aggregation aggregation_from(std::string_view s) {
  if (s == "majority") return Aggregation::kMajority;
  if (s == "soft") return Aggregation::kSoft;
  throw DataError("model file: unknown aggregation");
}

}  // namespace detail

inline std::string serialize_model(const ForestModel& model) {
  std::string out;
  out += "dp-lumberjack-model v1\n";
  out += "[meta]\n";
  out += "version=" + std::to_string(model.version) + "\n";
  out += "seed=" + std::to_string(model.seed) + "\n";
  {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(model.schema.hash()));
    out += std::string("schema_hash=") + buf + "\n";
  }
  out += "schema=" + model.schema.canonical_text() + "\n";
  out += "trees=" + std::to_string(model.trees.size()) + "\n";
  out += "depth=" + std::to_string(model.depth) + "\n";
  out += std::string("aggregation=") + detail::aggregation_name(model.aggregation) + "\n";
  out += std::string("leaf_mechanism=") + detail::mechanism_name(model.leaf_mechanism) +
         "\n";
  const AccountingTranscript& a = model.accounting;
  out += "[accounting]\n";
  out += "epsilon=" + format_double(a.epsilon) + "\n";
  out += "delta=" + format_double(a.delta) + "\n";
  out += "epsilon1=" + format_double(a.epsilon1) + "\n";
  out += "delta1=" + format_double(a.delta1) + "\n";
  out += "epsilon2=" + format_double(a.epsilon2) + "\n";
  out += "delta2=" + format_double(a.delta2) + "\n";
  out += "m=" + std::to_string(a.m) + "\n";
  out += "sigma=" + format_double(a.sigma) + "\n";
  out += "delta_gate=" + format_double(a.delta_gate) + "\n";
  out += "tau=" + format_double(a.tau) + "\n";
  out += "rho_total=" + format_double(a.rho_total) + "\n";
  out += "rho_per_leaf=" + format_double(a.rho_per_leaf) + "\n";
  out += "achieved_structure_delta=" + format_double(a.achieved_structure_delta) + "\n";
  out += std::string("oracle_variant=") + detail::variant_name(a.oracle_variant) + "\n";
  out += "structure_fraction=" + format_double(a.structure_fraction) + "\n";
  out += "delta_split=" + format_double(a.delta_split) + "\n";
  out += "[trees]\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const TreeModel& tree = model.trees[t];
    out += "tree " + std::to_string(t) + "\n";
    std::vector<NodeLabel> split_labels;
    split_labels.reserve(tree.splits.size());
    for (const auto& [label, rule] : tree.splits) split_labels.push_back(label);
    std::sort(split_labels.begin(), split_labels.end());
    for (NodeLabel label : split_labels) {
      const SplitRule& rule = tree.splits.at(label);
      out += "split " + label_to_string(label);
      if (rule.kind == SplitKind::kNumericThreshold) {
        out += " numeric " + std::to_string(rule.feature) + " " +
               format_double(rule.threshold) + "\n";
      } else {
        out += " category " + std::to_string(rule.feature) + " " +
               std::to_string(rule.category) + "\n";
      }
    }
    for (NodeLabel label : tree.heavy.sorted_labels())
      out += "heavy " + label_to_string(label) + "\n";
    for (const auto& [label, p] : tree.leaves) {
      out += "leaf " + label_to_string(label);
      if (model.leaf_mechanism == LeafMechanism::kExponentialMajority) {
        out += " vote " + std::to_string(p.vote) + "\n";
      } else {
        out += " dist";
        for (double v : p.distribution) out += " " + format_double(v);
        out += "\n";
      }
    }
  }
  out += "[checksum]\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(out)));
  out += std::string("fnv1a64=") + buf + "\n";
  return out;
}

inline ForestModel deserialize_model(std::string_view text) {
  // Checksum covers every byte up to and including the "[checksum]" line.
  const std::string_view tail_key = "fnv1a64=";
  const std::size_t tail = text.rfind(tail_key);
  if (tail == std::string_view::npos)
    throw DataError("model file: missing checksum line");
  {
    std::string_view payload = text.substr(0, tail);
    std::string_view hex = text.substr(tail + tail_key.size());
    while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r'))
      hex.remove_suffix(1);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(payload)));
    if (hex != buf) throw DataError("model file: checksum mismatch");
  }

  ForestModel model;
  std::unordered_map<std::string, std::string> kv;
  std::size_t num_trees = 0;
  bool in_trees = false;
  TreeModel* cur = nullptr;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_magic = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!saw_magic) {
      if (line != "dp-lumberjack-model v1")
        throw DataError("model file: unrecognized header");
      saw_magic = true;
      continue;
    }
    if (line == "[meta]" || line == "[accounting]") {
      in_trees = false;
      continue;
    }
    if (line == "[trees]") {
      in_trees = true;
      continue;
    }
    if (line == "[checksum]") break;
    if (!in_trees) {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw DataError("model file: malformed line " + std::to_string(line_no));
      kv[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
      continue;
    }
    if (line.rfind("tree ", 0) == 0) {
      const std::int64_t idx = parse_int64(line.substr(5));
      if (idx != static_cast<std::int64_t>(num_trees))
        throw DataError("model file: tree records out of order");
      model.trees.emplace_back();
      cur = &model.trees.back();
      ++num_trees;
      continue;
    }
    if (cur == nullptr)
      throw DataError("model file: record before the first tree header");
    std::vector<std::string_view> tok = split_view(line, ' ');
    if (tok.size() < 2) throw DataError("model file: malformed tree record");
    if (tok[0] == "split") {
      if (tok.size() != 5) throw DataError("model file: malformed split record");
      SplitRule rule;
      rule.feature = static_cast<int>(parse_int64(tok[3]));
      if (tok[2] == "numeric") {
        rule.kind = SplitKind::kNumericThreshold;
        rule.threshold = parse_double(tok[4]);
      } else if (tok[2] == "category") {
        rule.kind = SplitKind::kCategoryIs;
        rule.category = static_cast<int>(parse_int64(tok[4]));
      } else {
        throw DataError("model file: unknown split kind");
      }
      cur->splits.emplace(label_from_string(tok[1]), rule);
    } else if (tok[0] == "heavy") {
      if (tok.size() != 2) throw DataError("model file: malformed heavy record");
      cur->heavy.insert(label_from_string(tok[1]));
    } else if (tok[0] == "leaf") {
      if (tok.size() < 4) throw DataError("model file: malformed leaf record");
      LeafPredictor p;
      if (tok[2] == "vote") {
        p.vote = static_cast<int>(parse_int64(tok[3]));
      } else if (tok[2] == "dist") {
        for (std::size_t j = 3; j < tok.size(); ++j)
          p.distribution.push_back(parse_double(tok[j]));
      } else {
        throw DataError("model file: unknown leaf record");
      }
      cur->leaves.emplace(label_from_string(tok[1]), std::move(p));
    } else {
      throw DataError("model file: unknown tree record");
    }
  }

  const auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw DataError(std::string("model file: missing key ") + key);
    return it->second;
  };
  model.version = static_cast<int>(parse_int64(need("version")));
  if (model.version != 1) throw DataError("model file: unsupported version");
  model.seed = static_cast<std::uint64_t>(parse_int64(need("seed")));
  model.schema = FeatureSchema::from_json_text(need("schema"));
  {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(model.schema.hash()));
    if (need("schema_hash") != buf)
      throw DataError("model file: schema hash mismatch");
  }
  model.depth = static_cast<int>(parse_int64(need("depth")));
  model.aggregation = detail::aggregation_from(need("aggregation"));
  model.leaf_mechanism = detail::mechanism_from(need("leaf_mechanism"));
  if (parse_int64(need("trees")) != static_cast<std::int64_t>(num_trees))
    throw DataError("model file: tree count mismatch");

  AccountingTranscript& a = model.accounting;
  a.epsilon = parse_double(need("epsilon"));
  a.delta = parse_double(need("delta"));
  a.epsilon1 = parse_double(need("epsilon1"));
  a.delta1 = parse_double(need("delta1"));
  a.epsilon2 = parse_double(need("epsilon2"));
  a.delta2 = parse_double(need("delta2"));
  a.m = parse_int64(need("m"));
  a.sigma = parse_double(need("sigma"));
  a.delta_gate = parse_double(need("delta_gate"));
  a.tau = parse_double(need("tau"));
  a.rho_total = parse_double(need("rho_total"));
  a.rho_per_leaf = parse_double(need("rho_per_leaf"));
  a.achieved_structure_delta = parse_double(need("achieved_structure_delta"));
  a.oracle_variant = detail::variant_from(need("oracle_variant"));
  a.structure_fraction = parse_double(need("structure_fraction"));
  a.delta_split = parse_double(need("delta_split"));
  return model;
}

inline void save_model(const ForestModel& model, const std::string& path) {
  write_text_file(path, serialize_model(model));
}

inline ForestModel load_model(const std::string& path) {
  return deserialize_model(read_text_file(path));
}

}  // namespace lumberjack
