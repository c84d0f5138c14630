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

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lumberjack/errors.hpp"
#include "lumberjack/rng.hpp"

namespace lumberjack {

struct EpsilonDelta {
  double epsilon = 0.0;
  double delta = 0.0;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("epsilon must be positive and finite");
    if (!(delta > 0.0) || !(delta < 1.0))
      throw std::invalid_argument("delta must lie in (0, 1)");
  }
};

struct ZcdpBudget {
  double rho = 0.0;

  void validate() const {
    if (!(rho > 0.0) || !std::isfinite(rho))
      throw std::invalid_argument("rho must be positive and finite");
  }
};

inline constexpr double kInvSqrt2 = 0.7071067811865475244;

// Standard normal CDF via the complementary error function.
inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

// log Phi(x), finite for arguments far into the lower tail where Phi itself
// underflows. Three regimes:
//   x >= 0          log1p(-Q(x)) with Q the upper tail, relative-accurate
//   -37 < x < 0     direct log of the (still normal-range) erfc value
//   x <= -37        Mills-ratio asymptotic series, four terms
inline double log_std_normal_cdf(double x) {
  if (x >= 0.0) {
    const double q = 0.5 * std::erfc(x * kInvSqrt2);
    return std::log1p(-q);
  }
  if (x > -37.0) {
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  const double x2 = x * x;
  // Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
  const double series = -1.0 / x2 * (1.0 - 3.0 / x2 * (1.0 - 5.0 / x2));
  return -0.5 * x2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-x) +
         std::log1p(series);
}

// Smallest delta such that rho-zCDP implies (epsilon, delta)-DP, for
// epsilon >= rho. Strictly increasing in rho at fixed epsilon, strictly
// decreasing in epsilon at fixed rho.
inline double zcdp_to_dp(double rho, double epsilon) {
  if (!(rho > 0.0)) throw std::invalid_argument("zcdp_to_dp: rho must be positive");
  if (epsilon < rho)
    throw std::invalid_argument("zcdp_to_dp: requires epsilon >= rho");
  const double a = (epsilon - rho) / (2.0 * rho);
  const double denom =
      1.0 + a + std::sqrt((1.0 + a) * (1.0 + a) + 4.0 / (std::numbers::pi * rho));
  return 2.0 * std::exp(-(epsilon - rho) * (epsilon - rho) / (4.0 * rho)) / denom;
}

// Largest rho in (0, epsilon] whose conversion stays within the target delta.
// Bisection; monotonicity of the conversion in rho is asserted as the bracket
// shrinks rather than assumed silently.
inline ZcdpBudget max_rho_for(const EpsilonDelta& budget) {
  budget.validate();
  const double eps = budget.epsilon;
  const double delta = budget.delta;
  if (zcdp_to_dp(eps, eps) <= delta) return ZcdpBudget{eps};

  double lo = eps * 0x1.0p-60;
  int guard = 0;
  while (zcdp_to_dp(lo, eps) > delta) {
    lo *= 0x1.0p-60;
    if (++guard > 16 || lo <= 0.0)
      throw BudgetError("max_rho_for: no feasible rho for the requested budget");
  }
  double hi = eps;
  double f_lo = zcdp_to_dp(lo, eps);
  double f_hi = zcdp_to_dp(hi, eps);
  for (int it = 0; it < 200; ++it) {
    assert(f_lo <= f_hi);
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = zcdp_to_dp(mid, eps);
    if (f_mid <= delta) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  (void)f_lo;
  (void)f_hi;
  return ZcdpBudget{lo};
}

namespace detail {

// Tight Gaussian-mechanism delta, valid for any real epsilon. sigma is in
// units of the query sensitivity. Second term in log space so e^eps never
// overflows against an underflowing tail.
inline double gaussian_delta_any(double sigma, double epsilon) {
  const double b = 1.0 / (2.0 * sigma);
  const double c = epsilon * sigma;
  const double term1 = std_normal_cdf(b - c);
  const double log_term2 = epsilon + log_std_normal_cdf(-b - c);
  const double term2 = log_term2 < -745.0 ? 0.0 : std::exp(log_term2);
  return std::min(1.0, std::max(0.0, term1 - term2));
}

}  // namespace detail

// Exact delta of the Gaussian mechanism at noise scale sigma (in sensitivity
// units) for a given epsilon >= 0.
inline double gaussian_tight_delta(double sigma, double epsilon) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("gaussian_tight_delta: sigma must be positive");
  if (epsilon < 0.0)
    throw std::invalid_argument("gaussian_tight_delta: epsilon must be >= 0");
  return detail::gaussian_delta_any(sigma, epsilon);
}

enum class LeafMechanism { kExponentialMajority, kGaussianCounts };

struct LeafMechanismConfig {
  LeafMechanism kind = LeafMechanism::kExponentialMajority;
  double rho_per_leaf = 0.0;
  int num_classes = 0;
};

// Epsilon for the monotone bounded-range exponential mechanism run under a
// rho_leaf zCDP share.
inline double exp_mech_epsilon_for(double rho_leaf) {
  if (!(rho_leaf > 0.0))
    throw std::invalid_argument("exp_mech_epsilon_for: rho must be positive");
  return std::sqrt(32.0 * rho_leaf);
}

// Exponential mechanism over integer scores with sensitivity 1, sampled via
// the Gumbel-max trick. Ties between perturbed scores carry zero probability,
// so selection among equal scores is decided by the noise, never by index.
inline int exp_mech_select(const std::vector<std::int64_t>& scores,
                           double eps_em, RngStream& rng) {
  if (scores.empty())
    throw std::invalid_argument("exp_mech_select: empty score vector");
  if (eps_em < 0.0)
    throw std::invalid_argument("exp_mech_select: negative epsilon");
  int best = 0;
  double best_key = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double key =
        0.5 * eps_em * static_cast<double>(scores[i]) + rng.gumbel();
    if (i == 0 || key > best_key) {
      best = static_cast<int>(i);
      best_key = key;
    }
  }
  return best;
}

// Noise scale applied to each per-class count when one tree's leaf share of a
// forest-level rho budget is rho/k.
inline double leaf_noise_sd(int k, double rho) {
  if (k < 1) throw std::invalid_argument("leaf_noise_sd: k must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("leaf_noise_sd: rho must be positive");
  return std::sqrt(static_cast<double>(k) / (2.0 * rho));
}

// Gaussian-noised class histogram, clamped to non-negative and normalised to
// a probability vector. An all-zero vector after clamping falls back to the
// uniform distribution; empty leaves go through the same code path as any
// other leaf.
inline std::vector<double> gaussian_leaf_counts(
    const std::vector<std::int64_t>& counts, int k, double rho,
    RngStream& rng) {
  if (counts.empty())
    throw std::invalid_argument("gaussian_leaf_counts: empty count vector");
  const double sd = leaf_noise_sd(k, rho);
  std::vector<double> out(counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = std::max(0.0, static_cast<double>(counts[i]) + rng.gaussian(sd));
    total += out[i];
  }
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  for (double& p : out) p /= total;
  return out;
}

}  // namespace lumberjack
