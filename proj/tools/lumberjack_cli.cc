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

// Command-line front end. Exit codes: 0 ok, 2 usage, 3 data/schema error,
// 4 infeasible privacy budget.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "lumberjack/lumberjack.hpp"

namespace lj = lumberjack;

namespace {

void print_ingest_report(const lj::IngestReport& report) {
  std::cerr << "rows_kept=" << report.rows_kept << "\n"
            << "rows_rejected=" << report.rows_rejected << "\n"
            << "cells_clamped=" << report.cells_clamped << "\n";
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

void print_transcript(const lj::AccountingTranscript& a) {
  std::cout << "epsilon=" << lj::format_double(a.epsilon) << "\n"
            << "delta=" << lj::format_double(a.delta) << "\n"
            << "epsilon1=" << lj::format_double(a.epsilon1) << "\n"
            << "delta1=" << lj::format_double(a.delta1) << "\n"
            << "epsilon2=" << lj::format_double(a.epsilon2) << "\n"
            << "delta2=" << lj::format_double(a.delta2) << "\n"
            << "m=" << a.m << "\n"
            << "sigma=" << lj::format_double(a.sigma) << "\n"
            << "delta_gate=" << lj::format_double(a.delta_gate) << "\n"
            << "tau=" << lj::format_double(a.tau) << "\n"
            << "rho_total=" << lj::format_double(a.rho_total) << "\n"
            << "rho_per_leaf=" << lj::format_double(a.rho_per_leaf) << "\n"
            << "achieved_structure_delta="
            << lj::format_double(a.achieved_structure_delta) << "\n"
            << "oracle_variant="
            << (a.oracle_variant == lj::ThresholdVariant::kOneSided ? "one_sided"
                                                                    : "two_sided")
            << "\n"
            << "structure_fraction=" << lj::format_double(a.structure_fraction)
            << "\n"
            << "delta_split=" << lj::format_double(a.delta_split) << "\n";
}

struct TrainFlags {
  std::string data, schema, out;
  double epsilon = 1.0, delta = 1e-6;
  int trees = 30, depth = 100;
  double structure_fraction = 0.75, delta_split = 0.5;
  double tau = -1.0;  // <0: default policy 1 + delta_gate
  std::string oracle = "one_sided";
  std::string leaf_mechanism = "exponential_majority";
  std::string aggregation = "majority";
  std::uint64_t seed = 1;
  int threads = 0;
};

int run_train(const TrainFlags& f) {
  const lj::FeatureSchema schema = lj::FeatureSchema::load(f.schema);
  lj::IngestReport report;
  const lj::Dataset data = lj::ingest_csv_file(f.data, schema, true, &report);
  print_ingest_report(report);

  lj::TrainConfig cfg;
  cfg.trees = f.trees;
  cfg.depth = f.depth;
  cfg.budget = lj::EpsilonDelta{f.epsilon, f.delta};
  cfg.structure_fraction = f.structure_fraction;
  cfg.delta_split = f.delta_split;
  if (f.tau >= 0.0) cfg.tau_override = f.tau;
  cfg.oracle_variant = f.oracle == "two_sided" ? lj::ThresholdVariant::kTwoSided
                                               : lj::ThresholdVariant::kOneSided;
  if (f.oracle != "one_sided" && f.oracle != "two_sided")
    throw std::invalid_argument("--oracle must be one_sided or two_sided");
  if (f.leaf_mechanism == "exponential_majority")
    cfg.leaf_mechanism = lj::LeafMechanism::kExponentialMajority;
  else if (f.leaf_mechanism == "gaussian_counts")
    cfg.leaf_mechanism = lj::LeafMechanism::kGaussianCounts;
  else
    throw std::invalid_argument(
        "--leaf-mechanism must be exponential_majority or gaussian_counts");
  if (f.aggregation == "majority")
    cfg.aggregation = lj::Aggregation::kMajority;
  else if (f.aggregation == "soft")
    cfg.aggregation = lj::Aggregation::kSoft;
  else
    throw std::invalid_argument("--aggregation must be majority or soft");
  cfg.seed = f.seed;
  cfg.num_threads = f.threads;

  const lj::ForestModel model = lj::train_forest(data, schema, cfg);
  lj::save_model(model, f.out);
  print_transcript(model.accounting);
  std::cout << "model=" << f.out << "\n";
  return 0;
}

struct PredictFlags {
  std::string model, data, out, labels;
};

int run_predict(const PredictFlags& f) {
  const lj::ForestModel model = lj::load_model(f.model);
  lj::IngestReport report;
  const lj::Dataset data =
      lj::ingest_csv_file(f.data, model.schema, false, &report);
  print_ingest_report(report);
  const std::vector<int> preds = lj::predict(model, data);
  std::string out;
  for (int p : preds)
    out += model.schema.classes[static_cast<std::size_t>(p)] + "\n";
  if (f.out.empty())
    std::cout << out;
  else
    lj::write_text_file(f.out, out);
  return 0;
}

// Labels supplied out of band: one class name per line, aligned with the
// data rows before ingestion rejections.
std::vector<int> read_label_file(const std::string& path,
                                 const lj::FeatureSchema& schema,
                                 const lj::IngestReport& report) {
  const std::string text = lj::read_text_file(path);
  std::vector<std::string> lines;
  for (std::string_view v : lj::split_view(text, '\n')) {
    const std::string_view t = lj::trim_view(v);
    if (!t.empty()) lines.emplace_back(t);
  }
  std::vector<int> labels;
  labels.reserve(report.kept_rows.size());
  for (std::size_t row : report.kept_rows) {
    if (row >= lines.size())
      throw lj::DataError("label file has fewer rows than the data CSV");
    const int cls = schema.class_index(lines[row]);
    if (cls < 0) throw lj::DataError("unknown label value: " + lines[row]);
    labels.push_back(cls);
  }
  return labels;
}

int run_evaluate(const PredictFlags& f) {
  const lj::ForestModel model = lj::load_model(f.model);
  lj::IngestReport report;
  lj::Dataset data =
      lj::ingest_csv_file(f.data, model.schema, f.labels.empty(), &report);
  print_ingest_report(report);
  if (!f.labels.empty())
    data.labels = read_label_file(f.labels, model.schema, report);
  const lj::EvalResult r = lj::evaluate(model, data);
  std::cout << "accuracy=" << lj::format_double(r.accuracy) << "\n"
            << "n=" << r.n << "\n";
  const std::size_t c = model.schema.num_classes();
  for (std::size_t t = 0; t < c; ++t) {
    std::int64_t actual = 0, predicted = 0;
    for (std::size_t p = 0; p < c; ++p) {
      actual += r.confusion[t][p];
      predicted += r.confusion[p][t];
    }
    std::cout << "class " << model.schema.classes[t] << ": actual=" << actual
              << " predicted=" << predicted
              << " correct=" << r.confusion[t][t] << "\n";
  }
  return 0;
}

struct MoonsFlags {
  std::int64_t n = 10000;
  double f1_hi = 5.0, f2_hi = 4.0;
  std::uint64_t seed = 1;
  std::string out, schema_out;
};

int run_gen_moons(const MoonsFlags& f) {
  const lj::FeatureSchema schema = lj::moons_schema(f.f1_hi, f.f2_hi);
  const lj::Dataset data = lj::gen_moons(f.n, f.f1_hi, f.f2_hi, f.seed);
  lj::write_text_file(f.out, lj::dataset_to_csv(data, schema));
  if (!f.schema_out.empty()) schema.save(f.schema_out);
  std::cerr << "rows=" << data.n << "\n";
  return 0;
}

std::vector<std::pair<double, double>> parse_grids(
    const std::vector<std::string>& specs) {
  std::vector<std::pair<double, double>> grids;
  for (const std::string& s : specs) {
    const std::size_t x = s.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == s.size())
      throw std::invalid_argument("--grids entries look like 5x4");
    grids.emplace_back(lj::parse_double(std::string_view(s).substr(0, x)),
                       lj::parse_double(std::string_view(s).substr(x + 1)));
  }
  return grids;
}

void emit_csv(const std::string& csv, const std::string& out) {
  if (out.empty())
    std::cout << csv;
  else
    lj::write_text_file(out, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dp-lumberjack: differentially private random forests"};
  app.require_subcommand(1);

  TrainFlags tf;
  CLI::App* train = app.add_subcommand("train", "train a private forest");
  train->add_option("--data", tf.data, "training CSV")->required();
  train->add_option("--schema", tf.schema, "schema JSON")->required();
  train->add_option("--out", tf.out, "model output path")->required();
  train->add_option("--epsilon", tf.epsilon, "total epsilon");
  train->add_option("--delta", tf.delta, "total delta");
  train->add_option("--trees", tf.trees, "number of trees");
  train->add_option("--depth", tf.depth, "maximum tree depth");
  train->add_option("--structure-fraction", tf.structure_fraction,
                    "epsilon share spent on structure");
  train->add_option("--delta-split", tf.delta_split, "delta share spent on structure");
  train->add_option("--tau", tf.tau, "pruning threshold override (>= 1 + gate)");
  train->add_option("--oracle", tf.oracle, "one_sided | two_sided");
  train->add_option("--leaf-mechanism", tf.leaf_mechanism,
                    "exponential_majority | gaussian_counts");
  train->add_option("--aggregation", tf.aggregation, "majority | soft");
  train->add_option("--seed", tf.seed, "RNG seed");
  train->add_option("--threads", tf.threads, "worker threads (0: auto)");

  PredictFlags pf;
  CLI::App* predict = app.add_subcommand("predict", "emit one label per row");
  predict->add_option("--model", pf.model, "model file")->required();
  predict->add_option("--data", pf.data, "input CSV")->required();
  predict->add_option("--out", pf.out, "output path (default stdout)");

  PredictFlags ef;
  CLI::App* evaluate = app.add_subcommand("evaluate", "accuracy against labels");
  evaluate->add_option("--model", ef.model, "model file")->required();
  evaluate->add_option("--data", ef.data, "labeled CSV")->required();
  evaluate->add_option("--labels", ef.labels,
                       "separate label file, one class per row");

  MoonsFlags mf;
  CLI::App* moons = app.add_subcommand("gen-moons", "two-moons toy dataset");
  moons->add_option("--n", mf.n, "number of rows");
  moons->add_option("--f1-hi", mf.f1_hi, "upper bound of feature 1");
  moons->add_option("--f2-hi", mf.f2_hi, "upper bound of feature 2");
  moons->add_option("--seed", mf.seed, "RNG seed");
  moons->add_option("--out", mf.out, "CSV output path")->required();
  moons->add_option("--schema-out", mf.schema_out, "schema JSON output path");

  CLI::App* bench = app.add_subcommand("bench", "benchmark sweeps");
  bench->require_subcommand(1);

  lj::HhBenchConfig hh;
  std::string hh_out;
  bool hh_no_timing = false;
  int hh_threads = 0;
  CLI::App* bhh = bench->add_subcommand("hh", "detector vs top-down baseline");
  bhh->add_option("--heights", hh.heights, "tree heights to sweep");
  bhh->add_option("--n", hh.n, "datapoints per tree");
  bhh->add_option("--rho", hh.rho, "matched zCDP budget");
  bhh->add_option("--tau", hh.tau, "heavy threshold");
  bhh->add_option("--trials", hh.trials, "Monte-Carlo trials per height");
  bhh->add_option("--seed", hh.seed, "RNG seed");
  bhh->add_option("--dump-dir", hh.dump_dir, "write per-run heavy dumps here");
  bhh->add_option("--out", hh_out, "CSV output path (default stdout)");
  bhh->add_option("--threads", hh_threads, "worker threads (0: auto)");
  bhh->add_flag("--no-timing", hh_no_timing, "zero the wall_time_s column");

  lj::ForestBenchConfig fb;
  std::vector<std::string> fb_grids;
  std::string fb_out;
  bool fb_no_timing = false;
  int fb_threads = 0;
  CLI::App* bfo = bench->add_subcommand("forest", "two-moons accuracy sweep");
  bfo->add_option("--grids", fb_grids, "bound grids, e.g. 5x4 50x40");
  bfo->add_option("--n", fb.n, "rows per dataset");
  bfo->add_option("--epsilon", fb.epsilon, "total epsilon");
  bfo->add_option("--delta", fb.delta, "total delta");
  bfo->add_option("--trees", fb.trees, "number of trees");
  bfo->add_option("--depth", fb.depth, "maximum tree depth");
  bfo->add_option("--structure-fraction", fb.structure_fraction,
                  "epsilon share spent on structure");
  bfo->add_option("--seeds", fb.seeds, "number of seeds");
  bfo->add_option("--seed", fb.seed0, "first seed");
  bfo->add_option("--out", fb_out, "CSV output path (default stdout)");
  bfo->add_option("--threads", fb_threads, "worker threads (0: auto)");
  bfo->add_flag("--no-timing", fb_no_timing, "zero the wall_time_s column");

  lj::CalibrateBenchConfig cb;
  std::string cb_out;
  CLI::App* bca = bench->add_subcommand("calibrate", "calibration tables");
  bca->add_option("--epsilon", cb.epsilons, "epsilon grid");
  bca->add_option("--delta", cb.deltas, "delta grid");
  bca->add_option("--m", cb.ms, "query budget grid");
  bca->add_option("--mode", cb.mode, "simple | tight | both");
  bca->add_option("--out", cb_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (*train) return run_train(tf);
    if (*predict) return run_predict(pf);
    if (*evaluate) return run_evaluate(ef);
    if (*moons) return run_gen_moons(mf);
    if (*bhh) {
      hh.timing = !hh_no_timing;
      hh.threads = lj::detail::resolve_thread_count(hh_threads);
      emit_csv(lj::bench_hh_csv(hh), hh_out);
      return 0;
    }
    if (*bfo) {
      if (!fb_grids.empty()) fb.grids = parse_grids(fb_grids);
      fb.timing = !fb_no_timing;
      fb.threads = lj::detail::resolve_thread_count(fb_threads);
      emit_csv(lj::bench_forest_csv(fb), fb_out);
      return 0;
    }
    if (*bca) {
      emit_csv(lj::bench_calibrate_csv(cb), cb_out);
      return 0;
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const lj::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const lj::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const lj::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
