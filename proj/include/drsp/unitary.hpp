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

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "drsp/config.hpp"

namespace drsp {

/// Largest absolute entry of a complex matrix.
inline double max_abs_entry(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Max-entry residual of U^dagger U against the identity.
inline double unitarity_residual(const ComplexMatrix& u) {
  const auto n = u.cols();
  return max_abs_entry(u.adjoint() * u - ComplexMatrix::Identity(n, n));
}

/// Square complex matrix whose unitarity was checked on construction.
class UnitaryMatrix {
 public:
  /// Throws InvariantViolation when U^dagger U deviates from I by more
  /// than `tolerance` in any entry, std::invalid_argument when not square.
  explicit UnitaryMatrix(ComplexMatrix entries, double tolerance = tol::kUnitary)
      : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
      throw std::invalid_argument("unitary matrix must be square and non-empty");
    }
    const double residual = unitarity_residual(entries_);
    if (!(residual <= tolerance)) {
      throw InvariantViolation("matrix is not unitary: residual " + std::to_string(residual));
    }
  }

  static UnitaryMatrix identity(int dim) {
    return UnitaryMatrix(ComplexMatrix::Identity(dim, dim));
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const ComplexMatrix& matrix() const { return entries_; }
  Complex operator()(int row, int col) const { return entries_(row, col); }

  UnitaryMatrix adjoint() const { return UnitaryMatrix(entries_.adjoint()); }

  /// Product of two unitaries; residuals add, so the check uses a slightly
  /// wider slack than fresh construction.
  friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    if (a.dim() != b.dim()) {
      throw std::invalid_argument("unitary product dimension mismatch");
    }
    return UnitaryMatrix(a.entries_ * b.entries_, 4 * tol::kUnitary);
  }

  /// Kronecker product; `a` acts on the more significant factor.
  friend UnitaryMatrix kron(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    const int n = a.dim();
    const int m = b.dim();
    ComplexMatrix out(n * m, n * m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.block(i * m, j * m, m, m) = a.entries_(i, j) * b.entries_;
      }
    }
    return UnitaryMatrix(std::move(out), 4 * tol::kUnitary);
  }

 private:
  ComplexMatrix entries_;
};

}  // namespace drsp
