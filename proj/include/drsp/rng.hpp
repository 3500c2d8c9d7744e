// Copyright 2026 The drsp Authors
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

// Counter-based random draws. Every draw is a pure function of (key, counter),
// so a transcript is reproducible from one 64-bit seed no matter which order
// or thread evaluates it.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "drsp/config.hpp"

namespace drsp::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child key for `counter` under `key`.
inline constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t counter) {
  return splitmix64(key ^ splitmix64(counter));
}

/// Top 53 bits as a double in [0, 1).
inline constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr double uniform(std::uint64_t key, std::uint64_t counter) {
  return to_unit(derive(key, counter));
}

/// Sequential view over one key, for consumers that need many draws.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  double uniform() { return rng::uniform(key_, counter_++); }

  /// Standard normal pair by Box-Muller.
  std::pair<double, double> normal_pair() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  /// Standard complex Gaussian: real and imaginary parts N(0, 1).
  Complex complex_normal() {
    const auto [re, im] = normal_pair();
    return {re, im};
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform point on the complex unit sphere in C^d.
inline ComplexVector random_unit_vector(int d, std::uint64_t key) {
  Stream s(key);
  ComplexVector v(d);
  for (int i = 0; i < d; ++i) v[i] = s.complex_normal();
  return v / v.norm();
}

/// d x d matrix with i.i.d. standard complex Gaussian entries, unit
/// Frobenius norm.
inline ComplexMatrix random_unit_matrix(int d, std::uint64_t key) {
  Stream s(key);
  ComplexMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) m(r, c) = s.complex_normal();
  }
  return m / m.norm();
}

}  // namespace drsp::rng
