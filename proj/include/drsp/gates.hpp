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

// Builders for every unitary the protocols use. Each returns a UnitaryMatrix,
// so unitarity is checked once at construction.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "drsp/config.hpp"
#include "drsp/core.hpp"
#include "drsp/unitary.hpp"

namespace drsp {

enum class GateKind {
  kControlledAdd,
  kControlledSubtract,
  kControlledPhase,
  kBranchControlled,
  kCompletion,
  kFilter,
  kLocalBasis,
};

inline std::string_view gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::kControlledAdd: return "controlled-add";
    case GateKind::kControlledSubtract: return "controlled-subtract";
    case GateKind::kControlledPhase: return "controlled-phase";
    case GateKind::kBranchControlled: return "branch-controlled";
    case GateKind::kCompletion: return "completion";
    case GateKind::kFilter: return "filter";
    case GateKind::kLocalBasis: return "local-basis";
  }
  return "unknown";
}

/// Describes a gate by kind, local dimension and the control shift table
/// m -> k_m.
struct GateSpec {
  GateKind kind;
  int d;
  std::vector<int> shift_map;

  void validate() const {
    if (d < 2 || d > tol::kMaxDimension) throw std::invalid_argument("gate dimension out of range");
    if (static_cast<int>(shift_map.size()) != d) throw std::invalid_argument("shift map length must equal d");
    for (int k : shift_map) {
      if (k < 0 || k >= d) throw std::invalid_argument("shift map value outside [0, d)");
    }
  }
};

/// k_m = m, the table every protocol step uses.
inline std::vector<int> identity_shift(int d) {
  std::vector<int> k(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) k[static_cast<std::size_t>(m)] = m;
  return k;
}

enum class ShiftDirection { kAdd, kSubtract };

/// Permutation |m, j> -> |m, (j +/- k_m) mod d> with the first ket the control.
inline UnitaryMatrix controlled_add(int d, ShiftDirection direction, std::span<const int> shift_map) {
  GateSpec{direction == ShiftDirection::kAdd ? GateKind::kControlledAdd : GateKind::kControlledSubtract, d,
           std::vector<int>(shift_map.begin(), shift_map.end())}
      .validate();
  ComplexMatrix p = ComplexMatrix::Zero(d * d, d * d);
  for (int m = 0; m < d; ++m) {
    const int k = shift_map[static_cast<std::size_t>(m)];
    for (int j = 0; j < d; ++j) {
      const int shifted = direction == ShiftDirection::kAdd ? (j + k) % d : (j - k + d) % d;
      p(m * d + shifted, m * d + j) = 1.0;
    }
  }
  return UnitaryMatrix(std::move(p));
}

inline UnitaryMatrix controlled_add(int d, ShiftDirection direction = ShiftDirection::kAdd) {
  const auto k = identity_shift(d);
  return controlled_add(d, direction, k);
}

/// Diagonal gate multiplying |s, k> by exp(i * phases(s, k)).
inline UnitaryMatrix controlled_phase(int d, const Eigen::MatrixXd& phases) {
  if (phases.rows() != d || phases.cols() != d) throw std::invalid_argument("phase table must be d x d");
  if (!phases.allFinite()) throw std::invalid_argument("phase table has non-finite entries");
  ComplexVector diag(d * d);
  for (int s = 0; s < d; ++s) {
    for (int k = 0; k < d; ++k) diag[s * d + k] = std::polar(1.0, phases(s, k));
  }
  return UnitaryMatrix(ComplexMatrix(diag.asDiagonal()));
}

/// Unitary whose column `column` is `v`.
///
/// Built from the Householder reflection taking e_m onto v rotated so that
/// its m-th entry is real and non-negative; that rotation is then restored on
/// column m only, so every other column is the plain reflector column and the
/// output is a deterministic function of v.
inline UnitaryMatrix unitary_completion(const ComplexVector& v, int column) {
  const auto d = static_cast<int>(v.size());
  if (d < 2) throw std::invalid_argument("completion needs dimension >= 2");
  if (column < 0 || column >= d) throw std::invalid_argument("completion column out of range");
  if (std::abs(v.norm() - 1.0) > tol::kNorm) throw std::invalid_argument("completion vector is not unit norm");

  const double anchor = std::abs(v[column]);
  const Complex phase = anchor > 0.0 ? v[column] / anchor : Complex(1.0);
  const ComplexVector rotated = v * std::conj(phase);

  // Off-anchor weight; 1 - anchor is formed as rest / (1 + anchor) so the
  // reflector stays accurate when v is close to e_m.
  double rest = 0.0;
  for (int s = 0; s < d; ++s) {
    if (s != column) rest += std::norm(v[s]);
  }

  ComplexMatrix u = ComplexMatrix::Identity(d, d);
  if (rest > 0.0) {
    ComplexVector w = -rotated;
    w[column] = rest / (1.0 + anchor);
    u -= (2.0 / w.squaredNorm()) * (w * w.adjoint());
  }
  u.col(column) *= phase;
  return UnitaryMatrix(std::move(u));
}

/// Per-branch blocks w^(m) with column m equal to the m-shifted target,
/// (w^(m))_{s,m} = x_{(s + m) mod d}.
inline std::vector<UnitaryMatrix> branch_blocks(const TargetState& target) {
  const int d = target.dim();
  std::vector<UnitaryMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) {
    ComplexVector shifted(d);
    for (int s = 0; s < d; ++s) shifted[s] = target[(s + m) % d];
    blocks.push_back(unitary_completion(shifted, m));
  }
  return blocks;
}

/// sum_m block[m] (x) |m><m| on (A, C) with C the control.
inline UnitaryMatrix assemble_branch_controlled(const std::vector<UnitaryMatrix>& blocks) {
  const int d = static_cast<int>(blocks.size());
  ComplexMatrix w = ComplexMatrix::Zero(d * d, d * d);
  for (int m = 0; m < d; ++m) {
    const ComplexMatrix& b = blocks[static_cast<std::size_t>(m)].matrix();
    for (int a = 0; a < d; ++a) {
      for (int c = 0; c < d; ++c) w(a * d + m, c * d + m) = b(a, c);
    }
  }
  return UnitaryMatrix(std::move(w));
}

/// Information unitary and branch phase correction fused into one gate: in
/// branch C = m it sends |m>_A to sum_s x_{(s + m) mod d} |s>_A.
inline UnitaryMatrix branch_controlled_unitary(const TargetState& target) {
  return assemble_branch_controlled(branch_blocks(target));
}

/// Two-qubit filter on (A, C): identity on A = 0, and on A = 1 the rotation
/// sending |11> to (|a|/|b|)|11> + sqrt(1 - |a|^2/|b|^2)|10>.
inline UnitaryMatrix filter_unitary(Complex alpha, Complex beta) {
  const double a = std::abs(alpha);
  const double b = std::abs(beta);
  if (std::abs(a * a + b * b - 1.0) > tol::kNorm) throw std::invalid_argument("filter: |alpha|^2 + |beta|^2 != 1");
  if (b == 0.0) throw std::invalid_argument("filter: beta must be nonzero");
  if (a > b) throw std::invalid_argument("filter: requires |alpha| <= |beta|");
  const double ratio = a / b;
  const double off = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  ComplexMatrix u = ComplexMatrix::Identity(4, 4);
  u(2, 2) = ratio;
  u(2, 3) = off;
  u(3, 2) = -off;
  u(3, 3) = ratio;
  return UnitaryMatrix(std::move(u));
}

/// Single-qudit cyclic shift |j> -> |j + 1 mod d>.
inline UnitaryMatrix shift_gate(int d) {
  ComplexMatrix x = ComplexMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  return UnitaryMatrix(std::move(x));
}

}  // namespace drsp
