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

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lumberjack {

// splitmix64 finalizer; used both for stream derivation and for hashing
// wide node labels.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a word into a running seed. Order-sensitive on purpose: derive(s, {a,b})
// and derive(s, {b,a}) are unrelated streams.
inline std::uint64_t mix_into(std::uint64_t seed, std::uint64_t word) {
  return mix64(seed ^ (word + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

// A single pseudo-random stream. All distributions are hand-rolled on top of
// raw 64-bit draws so that a given (seed, call sequence) produces identical
// output on every run; no std::*_distribution state is involved.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); rejects exact zero so log() is always finite.
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n); rejection sampling on the top range.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // N(0, sd^2) via Box-Muller without the cached spare, so consumption per
  // call is fixed at two uniforms.
  double gaussian(double sd) {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return sd * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Standard Gumbel, for exponential-mechanism argmax sampling.
  double gumbel() { return -std::log(-std::log(uniform_pos())); }

 private:
  std::mt19937_64 gen_;
};

// Minimal splitmix64 generator. Construction is three multiplies, which
// matters where a fresh stream is needed per tree node; statistical quality
// is ample for structure draws. Noise streams stay on RngStream.
class SmallRng {
 public:
  explicit SmallRng(std::uint64_t seed) : s_(seed) {}

  std::uint64_t next_u64() {
    s_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::uint64_t s_;
};

inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(seed);
  for (std::uint64_t w : path) s = mix_into(s, w);
  return s;
}

// Derives an independent stream from a root seed and a path of identifiers.
// Streams with different paths are computationally unrelated, which is what
// makes per-tree / per-node / per-leaf randomness order-independent.
inline RngStream derive_stream(std::uint64_t seed,
                               std::initializer_list<std::uint64_t> path) {
  return RngStream(derive_seed(seed, path));
}

}  // namespace lumberjack
