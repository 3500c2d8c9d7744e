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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace drsp {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Numerical tolerances shared by every module. Tests import these rather
/// than restating literals.
namespace tol {
/// Unit-norm invariant on stored states, targets and channels.
inline constexpr double kNorm = 1e-10;
/// Inputs further than this from unit norm are rejected instead of renormalized.
inline constexpr double kConstruction = 1e-6;
/// Max-entry residual of U^dagger U - I accepted by UnitaryMatrix.
inline constexpr double kUnitary = 1e-12;
/// Singular values below this are clamped to zero.
inline constexpr double kSingularFloor = 1e-12;
/// Hermiticity, trace and positivity slack for density matrices.
inline constexpr double kDensity = 1e-10;
/// Largest imaginary residue tolerated on a fidelity before it is discarded.
inline constexpr double kFidelityImag = 1e-10;
/// A DRSP run with fidelity below 1 - kFidelityAlarm indicates a bug.
inline constexpr double kFidelityAlarm = 1e-8;
/// Default Schmidt-rank cutoff used by factorization checks.
inline constexpr double kRank = 1e-9;
/// Largest supported local dimension.
inline constexpr int kMaxDimension = 32;
}  // namespace tol

/// A numerical invariant failed after valid inputs were accepted. This
/// always points at an implementation defect, never at user input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace drsp
