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
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "lumberjack/errors.hpp"
#include "lumberjack/privacy.hpp"
#include "lumberjack/rng.hpp"

namespace lumberjack {

enum class ThresholdVariant { kOneSided, kTwoSided };

// sigma == 0 selects the dedicated noiseless mode (the deterministic limit of
// the mechanism); it is not a degenerate Gaussian draw.
struct ThresholdOracleConfig {
  double sigma = 1.0;
  double tau = 0.0;
  double delta_gate = 0.0;
  ThresholdVariant variant = ThresholdVariant::kOneSided;

  bool noiseless() const { return sigma == 0.0; }

  void validate() const {
    if (sigma < 0.0 || !std::isfinite(sigma))
      throw std::invalid_argument("threshold config: sigma must be >= 0 and finite");
    if (!std::isfinite(tau))
      throw std::invalid_argument("threshold config: tau must be finite");
    if (delta_gate < 0.0 || !std::isfinite(delta_gate))
      throw std::invalid_argument("threshold config: delta_gate must be >= 0");
  }
};

// One-sided private threshold test. Counts at or below tau - delta_gate - 1
// release Bottom without touching the noise stream; the skipped draw never
// influences any release, so lazy sampling is output-equivalent to sampling
// up front.
inline bool check_threshold_one_sided(std::int64_t count,
                                      const ThresholdOracleConfig& cfg,
                                      RngStream& rng) {
  const double q = static_cast<double>(count);
  if (!(q > cfg.tau - cfg.delta_gate - 1.0)) return false;
  if (cfg.noiseless()) return q > cfg.tau;
  return q + rng.gaussian(cfg.sigma) > cfg.tau;
}

// Two-sided variant: counts at or above tau + delta_gate + 1 release Top
// deterministically; the remaining band behaves like the one-sided test.
// Misclassification is therefore confined to (tau-delta_gate-1, tau+delta_gate+1).
inline bool check_threshold_two_sided(std::int64_t count,
                                      const ThresholdOracleConfig& cfg,
                                      RngStream& rng) {
  const double q = static_cast<double>(count);
  if (q >= cfg.tau + cfg.delta_gate + 1.0) return true;
  return check_threshold_one_sided(count, cfg, rng);
}

inline bool check_threshold(std::int64_t count, const ThresholdOracleConfig& cfg,
                            RngStream& rng) {
  return cfg.variant == ThresholdVariant::kTwoSided
             ? check_threshold_two_sided(count, cfg, rng)
             : check_threshold_one_sided(count, cfg, rng);
}

// Adaptive query budget for k trees of height h: each datapoint meets at most
// 1 + floor(log2 h) threshold queries per tree.
inline std::int64_t query_budget(std::int64_t k, std::int64_t h) {
  if (k < 1 || h < 1)
    throw std::invalid_argument("query_budget: k and h must be >= 1");
  const int log_h = std::bit_width(static_cast<std::uint64_t>(h)) - 1;
  return k * (1 + static_cast<std::int64_t>(log_h));
}

// Joint delta for m adaptive one-sided threshold queries at noise sigma and
// gate delta_gate, for a target epsilon. Maximum of three families of terms;
// the j index runs over every prefix length, evaluated exactly (no
// subsampling of the grid). Powers of Phi(delta_gate/sigma) live in log space
// so m in the thousands cannot underflow the whole expression.
inline double forest_delta(double sigma, double delta_gate, double epsilon,
                           std::int64_t m) {
  if (!(sigma > 0.0)) throw std::invalid_argument("forest_delta: sigma must be > 0");
  if (delta_gate < 0.0)
    throw std::invalid_argument("forest_delta: delta_gate must be >= 0");
  if (epsilon < 0.0)
    throw std::invalid_argument("forest_delta: epsilon must be >= 0");
  if (m < 1) throw std::invalid_argument("forest_delta: m must be >= 1");

  const double log_phi = log_std_normal_cdf(delta_gate / sigma);
  double best = -std::expm1(static_cast<double>(m) * log_phi);
  for (std::int64_t j = 1; j <= m; ++j) {
    const double gamma = static_cast<double>(m - j) * log_phi;
    const double sigma_j = sigma / std::sqrt(static_cast<double>(j));
    const double p_gate = std::exp(gamma);
    const double branch_ii =
        -std::expm1(gamma) +
        p_gate * detail::gaussian_delta_any(sigma_j, epsilon - gamma);
    const double branch_iii = detail::gaussian_delta_any(sigma_j, epsilon + gamma);
    best = std::max(best, std::max(branch_ii, branch_iii));
  }
  return std::min(1.0, best);
}

// Delta for m two-sided queries: the non-adaptive Gaussian term at full
// sensitivity sqrt(m) plus the probability that any of the m gate noises
// escapes the deterministic band.
inline double two_sided_delta(double sigma, double delta_gate, double epsilon,
                              std::int64_t m) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("two_sided_delta: sigma must be > 0");
  if (delta_gate < 0.0)
    throw std::invalid_argument("two_sided_delta: delta_gate must be >= 0");
  if (epsilon < 0.0)
    throw std::invalid_argument("two_sided_delta: epsilon must be >= 0");
  if (m < 1) throw std::invalid_argument("two_sided_delta: m must be >= 1");
  const double log_phi = log_std_normal_cdf(delta_gate / sigma);
  const double delta_inf = -std::expm1(static_cast<double>(m) * log_phi);
  const double delta_gauss = gaussian_tight_delta(
      sigma / std::sqrt(static_cast<double>(m)), epsilon);
  return std::min(1.0, delta_gauss + delta_inf);
}

struct CalibrationResult {
  double sigma = 0.0;
  double delta_gate = 0.0;
  double achieved_delta = 0.0;
};

// Closed-form calibration, valid only for epsilon < 1:
//   sigma = sqrt(2 m ln(2.5/delta)) / epsilon
//   delta_gate = sigma sqrt(2 ln(2 m / delta))
inline CalibrationResult calibrate_simple(double epsilon, double delta,
                                          std::int64_t m) {
  if (!(epsilon > 0.0) || epsilon >= 1.0)
    throw std::invalid_argument("calibrate_simple: requires 0 < epsilon < 1");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("calibrate_simple: delta must lie in (0, 1)");
  if (m < 1) throw std::invalid_argument("calibrate_simple: m must be >= 1");
  CalibrationResult r;
  r.sigma = std::sqrt(2.0 * static_cast<double>(m) * std::log(2.5 / delta)) / epsilon;
  r.delta_gate = r.sigma * std::sqrt(2.0 * std::log(2.0 * static_cast<double>(m) / delta));
  r.achieved_delta = forest_delta(r.sigma, r.delta_gate, epsilon, m);
  return r;
}

namespace detail {

// Shared frozen-ratio bisection: delta_of(sigma, delta_gate) is evaluated
// along the ray delta_gate = ratio * sigma and sigma is driven to the
// smallest feasible value. delta_of must be continuous and decreasing in
// sigma along the ray.
template <typename DeltaFn>
CalibrationResult calibrate_frozen_ratio(DeltaFn&& delta_of, double epsilon,
                                         double delta, std::int64_t m,
                                         std::optional<double> ratio_override) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("calibrate: epsilon must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("calibrate: delta must lie in (0, 1)");
  if (m < 1) throw std::invalid_argument("calibrate: m must be >= 1");

  const double ratio =
      ratio_override ? *ratio_override
                     : std::sqrt(2.0 * std::log(2.0 * static_cast<double>(m) / delta));
  if (!(ratio > 0.0))
    throw std::invalid_argument("calibrate: gate ratio must be positive");

  // The gate-escape term 1 - Phi(ratio)^m does not shrink with sigma; if it
  // already exceeds the target no sigma can help at this ratio.
  const double floor_delta =
      -std::expm1(static_cast<double>(m) * log_std_normal_cdf(ratio));
  if (floor_delta > delta)
    throw BudgetError("calibrate: gate ratio leaves no room under delta");

  const auto f = [&](double sigma) { return delta_of(sigma, ratio * sigma); };

  double hi;
  if (epsilon < 1.0) {
    hi = calibrate_simple(epsilon, delta, m).sigma;
  } else {
    hi = 1.0;
  }
  {
    int guard = 0;
    while (f(hi) > delta) {
      hi *= 2.0;
      if (++guard > 128) throw BudgetError("calibrate: no feasible sigma found");
    }
  }

  double lo = hi;
  int guard = 0;
  do {
    lo *= 0.5;
    if (++guard > 200) throw BudgetError("calibrate: lower bracket search failed");
  } while (!(f(lo) > delta));

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) <= delta)
      hi = mid;
    else
      lo = mid;
  }

  CalibrationResult r;
  r.sigma = hi;
  r.delta_gate = ratio * hi;
  r.achieved_delta = f(hi);
  assert(r.achieved_delta <= delta);
  return r;
}

}  // namespace detail

// Numeric calibration against the joint-forest delta. The gate ratio
// delta_gate/sigma is frozen (by default at the closed-form value) and sigma
// alone is bisected to the smallest value whose joint delta stays within the
// target; a 2-D search over the ratio is a deliberate extension point, not
// implemented. ratio_override exists for that extension point and for tests.
inline CalibrationResult calibrate_tight(
    double epsilon, double delta, std::int64_t m,
    std::optional<double> ratio_override = std::nullopt) {
  return detail::calibrate_frozen_ratio(
      [&](double sigma, double gate) { return forest_delta(sigma, gate, epsilon, m); },
      epsilon, delta, m, ratio_override);
}

// Same search against the two-sided accounting.
inline CalibrationResult calibrate_two_sided(
    double epsilon, double delta, std::int64_t m,
    std::optional<double> ratio_override = std::nullopt) {
  return detail::calibrate_frozen_ratio(
      [&](double sigma, double gate) {
        return two_sided_delta(sigma, gate, epsilon, m);
      },
      epsilon, delta, m, ratio_override);
}

}  // namespace lumberjack
