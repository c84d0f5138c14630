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

// End-to-end tests of the command line binary. Each test shells out to the
// real executable (path injected via LUMBERJACK_CLI_PATH) and inspects exit
// codes, stdout, stderr, and produced files.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lumberjack/lumberjack.hpp"

namespace {

namespace lj = lumberjack;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with `args` appended, capturing stdout and stderr.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string base = ::testing::TempDir() + "cli_run_" + std::to_string(counter++);
  const std::string out_path = base + ".out";
  const std::string err_path = base + ".err";
  const std::string cmd = std::string(LUMBERJACK_CLI_PATH) + " " + args + " >" +
                          out_path + " 2>" + err_path;
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

// Extracts "key=value" from a line-oriented report.
std::string report_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

// Shared fixture: one generated two-moons dataset plus a trained model.
class CliFlow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::string(::testing::TempDir() + "cli_flow/");
    ASSERT_EQ(std::system(("mkdir -p " + *dir_).c_str()), 0);
    csv_ = new std::string(*dir_ + "moons.csv");
    schema_ = new std::string(*dir_ + "moons_schema.json");
    model_ = new std::string(*dir_ + "model.txt");
    const RunResult gen = run_cli("gen-moons --n 800 --seed 11 --out " + *csv_ +
                                  " --schema-out " + *schema_);
    ASSERT_EQ(gen.exit_code, 0) << gen.err;
    const RunResult train = run_cli(
        "train --data " + *csv_ + " --schema " + *schema_ + " --out " + *model_ +
        " --trees 8 --depth 10 --epsilon 2 --delta 1e-6 --seed 5 --threads 1");
    ASSERT_EQ(train.exit_code, 0) << train.err;
    train_stdout_ = new std::string(train.out);
    train_stderr_ = new std::string(train.err);
  }

  static void TearDownTestSuite() {
    delete dir_;
    delete csv_;
    delete schema_;
    delete model_;
    delete train_stdout_;
    delete train_stderr_;
  }

  static std::string* dir_;
  static std::string* csv_;
  static std::string* schema_;
  static std::string* model_;
  static std::string* train_stdout_;
  static std::string* train_stderr_;
};

std::string* CliFlow::dir_ = nullptr;
std::string* CliFlow::csv_ = nullptr;
std::string* CliFlow::schema_ = nullptr;
std::string* CliFlow::model_ = nullptr;
std::string* CliFlow::train_stdout_ = nullptr;
std::string* CliFlow::train_stderr_ = nullptr;

TEST(CliBasics, NoArgumentsIsUsageError) {
  EXPECT_EQ(run_cli("").exit_code, 2);
}

TEST(CliBasics, HelpExitsZero) {
  const RunResult r = run_cli("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("train"), std::string::npos);
  EXPECT_NE(r.out.find("bench"), std::string::npos);
}

TEST(CliBasics, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
}

TEST_F(CliFlow, GenMoonsWritesCsvAndSchema) {
  const std::string csv = slurp(*csv_);
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "f1,f2,color");
  const lj::FeatureSchema schema = lj::FeatureSchema::load(*schema_);
  EXPECT_EQ(schema.num_features(), 2);
  EXPECT_EQ(schema.num_classes(), 3);
}

TEST_F(CliFlow, TrainReportsTranscriptAndModelPath) {
  EXPECT_EQ(report_value(*train_stdout_, "epsilon"), "2");
  EXPECT_EQ(report_value(*train_stdout_, "delta"), "1e-06");
  EXPECT_EQ(report_value(*train_stdout_, "epsilon1"), "1.5");
  EXPECT_EQ(report_value(*train_stdout_, "oracle_variant"), "one_sided");
  EXPECT_EQ(report_value(*train_stdout_, "m"),
            std::to_string(lj::query_budget(8, 10)));
  EXPECT_EQ(report_value(*train_stdout_, "model"), *model_);
  EXPECT_EQ(report_value(*train_stderr_, "rows_kept"), "800");
  EXPECT_EQ(report_value(*train_stderr_, "rows_rejected"), "0");
  const double sigma = lj::parse_double(report_value(*train_stdout_, "sigma"));
  const double tau = lj::parse_double(report_value(*train_stdout_, "tau"));
  EXPECT_GT(sigma, 0.0);
  EXPECT_GT(tau, 1.0);
  EXPECT_FALSE(slurp(*model_).empty());
}

TEST_F(CliFlow, PredictEmitsOneLabelPerRow) {
  const RunResult r = run_cli("predict --model " + *model_ + " --data " + *csv_);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    EXPECT_TRUE(line == "red" || line == "blue" || line == "green") << line;
    ++rows;
  }
  EXPECT_EQ(rows, 800u);
}

TEST_F(CliFlow, PredictToFileMatchesStdout) {
  const std::string out_path = *dir_ + "preds.txt";
  const RunResult to_file = run_cli("predict --model " + *model_ + " --data " +
                                    *csv_ + " --out " + out_path);
  ASSERT_EQ(to_file.exit_code, 0) << to_file.err;
  const RunResult to_stdout =
      run_cli("predict --model " + *model_ + " --data " + *csv_);
  ASSERT_EQ(to_stdout.exit_code, 0);
  EXPECT_EQ(slurp(out_path), to_stdout.out);
}

TEST_F(CliFlow, EvaluatePrintsAccuracyAndPerClassLines) {
  const RunResult r = run_cli("evaluate --model " + *model_ + " --data " + *csv_);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const double acc = lj::parse_double(report_value(r.out, "accuracy"));
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
  EXPECT_EQ(report_value(r.out, "n"), "800");
  EXPECT_NE(r.out.find("class red:"), std::string::npos);
  EXPECT_NE(r.out.find("class blue:"), std::string::npos);
  EXPECT_NE(r.out.find("class green:"), std::string::npos);
}

TEST_F(CliFlow, EvaluateAgainstOwnPredictionsScoresPerfect) {
  const std::string preds = *dir_ + "self_labels.txt";
  const RunResult p = run_cli("predict --model " + *model_ + " --data " + *csv_ +
                              " --out " + preds);
  ASSERT_EQ(p.exit_code, 0);
  const RunResult e = run_cli("evaluate --model " + *model_ + " --data " + *csv_ +
                              " --labels " + preds);
  ASSERT_EQ(e.exit_code, 0) << e.err;
  EXPECT_EQ(report_value(e.out, "accuracy"), "1");
}

TEST_F(CliFlow, ShortLabelFileIsDataError) {
  const std::string labels = *dir_ + "short_labels.txt";
  std::ofstream(labels) << "red\nblue\n";
  const RunResult r = run_cli("evaluate --model " + *model_ + " --data " + *csv_ +
                              " --labels " + labels);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("label file"), std::string::npos);
}

TEST_F(CliFlow, UnknownLabelValueIsDataError) {
  std::string text;
  for (int i = 0; i < 800; ++i) text += "magenta\n";
  const std::string labels = *dir_ + "bad_labels.txt";
  std::ofstream(labels) << text;
  const RunResult r = run_cli("evaluate --model " + *model_ + " --data " + *csv_ +
                              " --labels " + labels);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("unknown label"), std::string::npos);
}

TEST_F(CliFlow, RetrainWithSameSeedIsByteIdentical) {
  const std::string again = *dir_ + "model_again.txt";
  const RunResult r = run_cli(
      "train --data " + *csv_ + " --schema " + *schema_ + " --out " + again +
      " --trees 8 --depth 10 --epsilon 2 --delta 1e-6 --seed 5 --threads 1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(slurp(again), slurp(*model_));
}

TEST_F(CliFlow, DifferentSeedChangesTheModel) {
  const std::string other = *dir_ + "model_seed6.txt";
  const RunResult r = run_cli(
      "train --data " + *csv_ + " --schema " + *schema_ + " --out " + other +
      " --trees 8 --depth 10 --epsilon 2 --delta 1e-6 --seed 6 --threads 1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(slurp(other), slurp(*model_));
}

TEST_F(CliFlow, BadStructureFractionIsUsageError) {
  const RunResult r = run_cli("train --data " + *csv_ + " --schema " + *schema_ +
                              " --out /dev/null --structure-fraction 1.0");
  EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliFlow, BadOracleNameIsUsageError) {
  const RunResult r = run_cli("train --data " + *csv_ + " --schema " + *schema_ +
                              " --out /dev/null --oracle sideways");
  EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliFlow, TauBelowPolicyFloorIsUsageError) {
  const RunResult r = run_cli("train --data " + *csv_ + " --schema " + *schema_ +
                              " --out /dev/null --tau 1.0");
  EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliFlow, MissingDataFileIsDataError) {
  const RunResult r = run_cli("train --data /nonexistent.csv --schema " +
                              *schema_ + " --out /dev/null");
  EXPECT_EQ(r.exit_code, 3);
}

TEST_F(CliFlow, MismatchedSchemaIsSchemaError) {
  const std::string narrow = *dir_ + "narrow.csv";
  std::ofstream(narrow) << "f1,label\n1.0,red\n";
  const RunResult r = run_cli("train --data " + narrow + " --schema " + *schema_ +
                              " --out /dev/null");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("missing schema column"), std::string::npos);
}

TEST_F(CliFlow, TrainTwoSidedOracleRuns) {
  const std::string ts = *dir_ + "model_two_sided.txt";
  const RunResult r = run_cli(
      "train --data " + *csv_ + " --schema " + *schema_ + " --out " + ts +
      " --trees 4 --depth 8 --oracle two_sided --seed 2 --threads 1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(report_value(r.out, "oracle_variant"), "two_sided");
}

TEST(CliBench, CalibrateDefaultMatchesClosedForm) {
  const RunResult r = run_cli("bench calibrate");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, row;
  ASSERT_TRUE(std::getline(in, header));
  EXPECT_EQ(header, lj::kCalibrateBenchHeader);
  ASSERT_TRUE(std::getline(in, row));
  const std::vector<std::string> f = lj::parse_csv_line(row);
  ASSERT_EQ(f.size(), 7u);
  EXPECT_EQ(f[0], "simple");
  const lj::CalibrationResult p = lj::calibrate_simple(0.5, 1e-6, 1);
  EXPECT_NEAR(lj::parse_double(f[4]), p.sigma, 1e-9);
  EXPECT_NEAR(lj::parse_double(f[5]), p.delta_gate, 1e-9);
}

TEST(CliBench, HhSweepIsSchemaStableAndReproducibleWithoutTiming) {
  const std::string args =
      "bench hh --heights 4 --n 60 --rho 0.5 --tau 5 --trials 2 --seed 3 "
      "--no-timing --threads 1";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  ASSERT_EQ(b.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::string header;
  ASSERT_TRUE(std::getline(in, header));
  EXPECT_EQ(header, lj::kHhBenchHeader);
  std::string row;
  std::size_t rows = 0;
  while (std::getline(in, row)) {
    const std::vector<std::string> f = lj::parse_csv_line(row);
    ASSERT_EQ(f.size(), 11u) << row;
    EXPECT_TRUE(f[0] == "detector" || f[0] == "baseline") << row;
    EXPECT_EQ(f[10], "0") << "timing column must be zeroed";
    ++rows;
  }
  EXPECT_EQ(rows, 4u);  // two methods, two trials, one height
}

TEST(CliBench, ForestSweepIsSchemaStableAndReproducibleWithoutTiming) {
  const std::string args =
      "bench forest --grids 5x4 --n 300 --trees 3 --depth 6 --seeds 1 "
      "--no-timing --threads 1";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::string header;
  ASSERT_TRUE(std::getline(in, header));
  EXPECT_EQ(header, lj::kForestBenchHeader);
  std::string row;
  std::size_t forest_rows = 0, majority_rows = 0;
  while (std::getline(in, row)) {
    const std::vector<std::string> f = lj::parse_csv_line(row);
    ASSERT_EQ(f.size(), 12u) << row;
    if (f[0] == "lumberjack") ++forest_rows;
    if (f[0] == "majority") ++majority_rows;
    EXPECT_EQ(f[11], "0");
    const double acc = lj::parse_double(f[10]);
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
  }
  EXPECT_EQ(forest_rows, 1u);
  EXPECT_EQ(majority_rows, 1u);
}

TEST(CliBench, BadGridSpecIsUsageError) {
  EXPECT_EQ(run_cli("bench forest --grids nonsense").exit_code, 2);
}

TEST(CliBench, OutFlagWritesTheCsv) {
  const std::string path = ::testing::TempDir() + "cal.csv";
  const RunResult r = run_cli("bench calibrate --out " + path);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const std::string csv = slurp(path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), lj::kCalibrateBenchHeader);
}

}  // namespace
