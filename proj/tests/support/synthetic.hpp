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

// Deterministic census-style benchmark dataset for tests: 48842 rows, 14
// mixed-type features, binary income label with a fixed 37169/11673 class
// split (majority rate 37169/48842, about 0.761). Features are drawn
// class-conditionally with strong marginal signal so that random-split
// forests can learn the label from cell majorities.

#ifndef LUMBERJACK_TESTS_SUPPORT_SYNTHETIC_HPP_
#define LUMBERJACK_TESTS_SUPPORT_SYNTHETIC_HPP_

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "lumberjack/dataset.hpp"
#include "lumberjack/rng.hpp"
#include "lumberjack/schema.hpp"

namespace lumberjack {
namespace testsupport {

inline constexpr std::int64_t kCensusRows = 48842;
inline constexpr std::int64_t kCensusHighIncome = 11673;  // class ">50K"

inline FeatureSchema census_schema() {
  FeatureSchema s;
  const auto num = [&](const char* name, double lo, double hi) {
    FeatureSpec f;
    f.name = name;
    f.kind = FeatureKind::kNumeric;
    f.lower = lo;
    f.upper = hi;
    s.features.push_back(std::move(f));
  };
  const auto cat = [&](const char* name, std::vector<std::string> domain) {
    FeatureSpec f;
    f.name = name;
    f.kind = FeatureKind::kCategorical;
    f.domain = std::move(domain);
    s.features.push_back(std::move(f));
  };
  num("age", 17.0, 90.0);
  cat("workclass", {"private", "self_emp", "gov", "other"});
  num("fnlwgt", 10000.0, 1500000.0);
  cat("education", {"hs_or_less", "some_college", "bachelors", "advanced"});
  num("education_num", 1.0, 16.0);
  cat("marital_status", {"married", "never_married", "divorced", "other"});
  cat("occupation",
      {"professional", "managerial", "sales", "clerical", "manual", "service"});
  cat("relationship", {"husband", "wife", "not_in_family", "own_child", "other"});
  cat("race", {"white", "black", "asian", "other"});
  cat("sex", {"male", "female"});
  num("capital_gain", 0.0, 99999.0);
  num("capital_loss", 0.0, 4400.0);
  num("hours_per_week", 1.0, 99.0);
  cat("native_country", {"us", "other"});
  s.label_name = "income";
  s.classes = {"<=50K", ">50K"};
  s.validate();
  return s;
}

namespace detail {

inline double clamped_gaussian(RngStream& rng, double mean, double sd,
                               double lo, double hi) {
  return std::clamp(mean + rng.gaussian(sd), lo, hi);
}

inline double categorical_draw(RngStream& rng, const std::vector<double>& pmf) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
    if (u < pmf[i]) return static_cast<double>(i);
    u -= pmf[i];
  }
  return static_cast<double>(pmf.size() - 1);
}

}  // namespace detail

// One row of class `cls` (0 = "<=50K", 1 = ">50K"), feature order as in
// census_schema(). The per-class parameters are fixed; only `rng` varies.
inline void census_row(RngStream& rng, int cls, std::vector<double>& out) {
  using detail::categorical_draw;
  using detail::clamped_gaussian;
  out.resize(14);
  const bool hi = cls == 1;
  out[0] = clamped_gaussian(rng, hi ? 44.5 : 35.5, hi ? 10.0 : 13.0, 17, 90);
  out[1] = categorical_draw(rng, hi ? std::vector<double>{0.60, 0.20, 0.18, 0.02}
                                    : std::vector<double>{0.74, 0.07, 0.12, 0.07});
  out[2] = clamped_gaussian(rng, 190000, 105000, 10000, 1500000);
  out[3] = categorical_draw(rng, hi ? std::vector<double>{0.20, 0.21, 0.35, 0.24}
                                    : std::vector<double>{0.57, 0.28, 0.11, 0.04});
  out[4] = clamped_gaussian(rng, hi ? 12.8 : 9.4, hi ? 2.2 : 2.4, 1, 16);
  out[5] = categorical_draw(rng, hi ? std::vector<double>{0.86, 0.05, 0.06, 0.03}
                                    : std::vector<double>{0.32, 0.42, 0.18, 0.08});
  out[6] = categorical_draw(
      rng, hi ? std::vector<double>{0.29, 0.29, 0.13, 0.07, 0.18, 0.04}
              : std::vector<double>{0.11, 0.09, 0.11, 0.14, 0.32, 0.23});
  out[7] = categorical_draw(
      rng, hi ? std::vector<double>{0.72, 0.12, 0.10, 0.01, 0.05}
              : std::vector<double>{0.24, 0.05, 0.34, 0.22, 0.15});
  out[8] = categorical_draw(rng, hi ? std::vector<double>{0.91, 0.05, 0.03, 0.01}
                                    : std::vector<double>{0.84, 0.11, 0.03, 0.02});
  out[9] = categorical_draw(rng, hi ? std::vector<double>{0.85, 0.15}
                                    : std::vector<double>{0.61, 0.39});
  out[10] = rng.uniform() < (hi ? 0.30 : 0.04)
                ? rng.uniform(hi ? 5000.0 : 500.0, hi ? 30000.0 : 7000.0)
                : 0.0;
  out[11] = rng.uniform() < (hi ? 0.15 : 0.03)
                ? rng.uniform(hi ? 1500.0 : 1000.0, 2600.0)
                : 0.0;
  out[12] = clamped_gaussian(rng, hi ? 45.5 : 38.0, hi ? 9.0 : 11.0, 1, 99);
  out[13] = categorical_draw(rng, hi ? std::vector<double>{0.93, 0.07}
                                     : std::vector<double>{0.90, 0.10});
}

// Full dataset: exact class counts, rows shuffled by `seed` so that any
// contiguous split is class-balanced in expectation.
inline Dataset gen_census(std::uint64_t seed) {
  std::vector<int> labels(static_cast<std::size_t>(kCensusRows), 0);
  std::fill(labels.begin(),
            labels.begin() + static_cast<std::size_t>(kCensusHighIncome), 1);
  RngStream shuffle = derive_stream(seed, {0x63656e737573u, 1});
  for (std::size_t i = labels.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(shuffle.uniform_int(i));
    std::swap(labels[i - 1], labels[j]);
  }

  Dataset data;
  data.num_features = 14;
  RngStream rng = derive_stream(seed, {0x63656e737573u, 2});
  std::vector<double> row;
  for (int lab : labels) {
    census_row(rng, lab, row);
    data.append_row(row, lab);
  }
  return data;
}

}  // namespace testsupport
}  // namespace lumberjack

#endif  // LUMBERJACK_TESTS_SUPPORT_SYNTHETIC_HPP_
