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

// Dense statevector representation of registers of d-level subsystems.
//
// Index convention: subsystem 0 is the most significant digit. For a register
// (A, B, C) of equal dimension d the ket |a,b,c> sits at flat index
// (a * d + b) * d + c.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "drsp/config.hpp"
#include "drsp/unitary.hpp"

namespace drsp {

class PureState {
 public:
  /// Wraps amplitudes that are already unit norm. Callers outside this
  /// library should go through make_state().
  static PureState assume_normalized(std::vector<int> dims, ComplexVector amplitudes) {
    return PureState(std::move(dims), std::move(amplitudes));
  }

  const std::vector<int>& dims() const { return dims_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t flat) const { return amplitudes_[static_cast<Eigen::Index>(flat)]; }
  int num_subsystems() const { return static_cast<int>(dims_.size()); }
  std::size_t size() const { return static_cast<std::size_t>(amplitudes_.size()); }
  double norm() const { return amplitudes_.norm(); }

  /// Number of flat indices spanned by one step of `subsystem`'s digit.
  std::size_t stride(int subsystem) const {
    std::size_t s = 1;
    for (int k = num_subsystems() - 1; k > subsystem; --k) s *= static_cast<std::size_t>(dims_[k]);
    return s;
  }

  int digit(std::size_t flat, int subsystem) const {
    return static_cast<int>((flat / stride(subsystem)) % static_cast<std::size_t>(dims_[subsystem]));
  }

 private:
  PureState(std::vector<int> dims, ComplexVector amplitudes)
      : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {}

  std::vector<int> dims_;
  ComplexVector amplitudes_;
};

namespace detail {

inline void check_dims(const std::vector<int>& dims) {
  if (dims.empty()) throw std::invalid_argument("register needs at least one subsystem");
  for (int d : dims) {
    if (d < 2) throw std::invalid_argument("subsystem dimension must be at least 2");
    if (d > tol::kMaxDimension) throw std::invalid_argument("subsystem dimension exceeds supported maximum");
  }
}

inline std::size_t product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

/// Rescales to unit norm when within tol::kConstruction; throws otherwise.
inline ComplexVector normalized_or_throw(ComplexVector v, const char* what) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument(std::string(what) + ": zero or non-finite vector");
  if (std::abs(n * n - 1.0) > tol::kConstruction) {
    throw std::invalid_argument(std::string(what) + ": norm deviates from 1 by more than the construction tolerance");
  }
  v /= n;
  return v;
}

}  // namespace detail

/// Builds a validated state, renormalizing small rounding in the input.
inline PureState make_state(std::vector<int> dims, ComplexVector amplitudes) {
  detail::check_dims(dims);
  if (static_cast<std::size_t>(amplitudes.size()) != detail::product(dims)) {
    throw std::invalid_argument("amplitude count does not match product of dimensions");
  }
  return PureState::assume_normalized(std::move(dims), detail::normalized_or_throw(std::move(amplitudes), "state"));
}

/// Computational basis ket |digits> over `dims`.
inline PureState basis_state(std::vector<int> dims, const std::vector<int>& digits) {
  detail::check_dims(dims);
  if (digits.size() != dims.size()) throw std::invalid_argument("basis label length mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (digits[k] < 0 || digits[k] >= dims[k]) throw std::invalid_argument("basis digit out of range");
    flat = flat * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(digits[k]);
  }
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(detail::product(dims)));
  v[static_cast<Eigen::Index>(flat)] = 1.0;
  return PureState::assume_normalized(std::move(dims), std::move(v));
}

/// Hermitian, unit-trace, positive semidefinite d x d matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 2) {
      throw std::invalid_argument("density matrix must be square with dimension >= 2");
    }
    if (max_abs_entry(entries_ - entries_.adjoint()) > tol::kDensity) {
      throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(entries_.trace() - Complex(1.0)) > tol::kDensity) {
      throw std::invalid_argument("density matrix trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(entries_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol::kDensity) {
      throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
  }

  static DensityMatrix pure(const ComplexVector& ket) {
    return DensityMatrix(ket * ket.adjoint());
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const ComplexMatrix& matrix() const { return entries_; }
  Complex operator()(int r, int c) const { return entries_(r, c); }

 private:
  ComplexMatrix entries_;
};

/// Amplitudes x_n = |x_n| e^{i theta_n} of the state to be prepared remotely.
class TargetState {
 public:
  explicit TargetState(ComplexVector amplitudes)
      : amplitudes_(detail::normalized_or_throw(std::move(amplitudes), "target")) {
    if (amplitudes_.size() < 2 || amplitudes_.size() > tol::kMaxDimension) {
      throw std::invalid_argument("target dimension out of range");
    }
  }

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  Complex operator[](int n) const { return amplitudes_[n]; }
  double magnitude(int n) const { return std::abs(amplitudes_[n]); }
  double phase(int n) const { return std::arg(amplitudes_[n]); }

 private:
  ComplexVector amplitudes_;
};

/// lambda = left * diag(coefficients) * right^dagger, coefficients descending.
struct SchmidtForm {
  RealVector coefficients;
  UnitaryMatrix left;
  UnitaryMatrix right;

  ComplexMatrix reconstruct() const {
    return left.matrix() * coefficients.cast<Complex>().asDiagonal() * right.matrix().adjoint();
  }
  int rank(double cutoff = tol::kSingularFloor) const {
    return static_cast<int>((coefficients.array() > cutoff).count());
  }
};

namespace detail {

inline SchmidtForm compute_schmidt(const ComplexMatrix& lambda) {
  Eigen::JacobiSVD<ComplexMatrix> svd(lambda, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RealVector s = svd.singularValues();
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] < tol::kSingularFloor) s[k] = 0.0;
  }
  SchmidtForm form{std::move(s), UnitaryMatrix(svd.matrixU()), UnitaryMatrix(svd.matrixV())};
  if (max_abs_entry(form.reconstruct() - lambda) > tol::kNorm) {
    throw InvariantViolation("Schmidt reconstruction error above tolerance");
  }
  return form;
}

}  // namespace detail

/// Bipartite pure channel sum_{mn} lambda_mn |m n>_AB, with its Schmidt form
/// computed once at construction.
class ChannelState {
 public:
  explicit ChannelState(ComplexMatrix coefficients) {
    if (coefficients.rows() != coefficients.cols()) throw std::invalid_argument("channel matrix must be square");
    if (coefficients.rows() < 2 || coefficients.rows() > tol::kMaxDimension) {
      throw std::invalid_argument("channel dimension out of range");
    }
    const double n = coefficients.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("channel: zero or non-finite coefficients");
    if (std::abs(n * n - 1.0) > tol::kConstruction) {
      throw std::invalid_argument("channel: norm deviates from 1 by more than the construction tolerance");
    }
    coefficients_ = coefficients / n;
    schmidt_ = detail::compute_schmidt(coefficients_);
  }

  /// sum_m c_m |m m>.
  static ChannelState diagonal(const ComplexVector& c) {
    return ChannelState(ComplexMatrix(c.asDiagonal()));
  }

  /// d = 2 channel sin(theta)|00> + cos(theta)|11>.
  static ChannelState from_theta(double theta) {
    ComplexVector c(2);
    c << std::sin(theta), std::cos(theta);
    return diagonal(c);
  }

  int dim() const { return static_cast<int>(coefficients_.rows()); }
  const ComplexMatrix& coefficients() const { return coefficients_; }
  const SchmidtForm& schmidt() const { return *schmidt_; }

  bool is_structurally_diagonal() const {
    for (int r = 0; r < dim(); ++r) {
      for (int c = 0; c < dim(); ++c) {
        if (r != c && coefficients_(r, c) != Complex(0.0)) return false;
      }
    }
    return true;
  }

  /// Two-subsystem state with lambda_mn at flat index m * d + n.
  PureState as_state() const {
    ComplexVector v(dim() * dim());
    for (int m = 0; m < dim(); ++m) {
      for (int n = 0; n < dim(); ++n) v[m * dim() + n] = coefficients_(m, n);
    }
    return PureState::assume_normalized({dim(), dim()}, std::move(v));
  }

 private:
  ComplexMatrix coefficients_;
  std::optional<SchmidtForm> schmidt_;
};

inline PureState tensor(const PureState& left, const PureState& right) {
  std::vector<int> dims = left.dims();
  dims.insert(dims.end(), right.dims().begin(), right.dims().end());
  const auto n = static_cast<Eigen::Index>(left.size());
  const auto m = static_cast<Eigen::Index>(right.size());
  ComplexVector out(n * m);
  for (Eigen::Index i = 0; i < n; ++i) out.segment(i * m, m) = left.amplitudes()[i] * right.amplitudes();
  return PureState::assume_normalized(std::move(dims), std::move(out));
}

namespace detail {

inline void check_subsystem(const PureState& s, int index) {
  if (index < 0 || index >= s.num_subsystems()) throw std::out_of_range("subsystem index out of range");
}

/// Reshapes the amplitudes into a matrix whose rows enumerate `rows`
/// (mixed radix, first listed most significant) and whose columns enumerate
/// the remaining subsystems in register order.
inline ComplexMatrix bipartite_matrix(const PureState& s, const std::vector<int>& rows) {
  std::vector<int> cols;
  for (int k = 0; k < s.num_subsystems(); ++k) {
    if (std::find(rows.begin(), rows.end(), k) == rows.end()) cols.push_back(k);
  }
  std::size_t nrows = 1;
  for (int k : rows) nrows *= static_cast<std::size_t>(s.dims()[k]);
  const std::size_t ncols = s.size() / nrows;
  ComplexMatrix m(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
  for (std::size_t flat = 0; flat < s.size(); ++flat) {
    std::size_t r = 0;
    for (int k : rows) r = r * static_cast<std::size_t>(s.dims()[k]) + static_cast<std::size_t>(s.digit(flat, k));
    std::size_t c = 0;
    for (int k : cols) c = c * static_cast<std::size_t>(s.dims()[k]) + static_cast<std::size_t>(s.digit(flat, k));
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s.amplitude(flat);
  }
  return m;
}

}  // namespace detail

/// Applies `u` to the listed subsystems (targets[0] is the most significant
/// factor of u), identity elsewhere.
inline PureState apply_unitary(const PureState& state, const UnitaryMatrix& u, std::span<const int> targets) {
  if (targets.empty()) throw std::invalid_argument("apply_unitary needs at least one target");
  std::size_t block = 1;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    detail::check_subsystem(state, targets[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) throw std::invalid_argument("repeated target subsystem");
    }
    block *= static_cast<std::size_t>(state.dims()[targets[i]]);
  }
  if (block != static_cast<std::size_t>(u.dim())) throw std::invalid_argument("unitary dimension does not match targets");

  std::vector<std::size_t> offsets(block);
  for (std::size_t t = 0; t < block; ++t) {
    std::size_t rem = t;
    std::size_t off = 0;
    for (std::size_t i = targets.size(); i-- > 0;) {
      const auto d = static_cast<std::size_t>(state.dims()[targets[i]]);
      off += (rem % d) * state.stride(targets[i]);
      rem /= d;
    }
    offsets[t] = off;
  }
  std::vector<std::size_t> bases;
  bases.reserve(state.size() / block);
  for (std::size_t flat = 0; flat < state.size(); ++flat) {
    bool zero = true;
    for (int t : targets) {
      if (state.digit(flat, t) != 0) {
        zero = false;
        break;
      }
    }
    if (zero) bases.push_back(flat);
  }

  const auto nb = static_cast<Eigen::Index>(bases.size());
  const auto nt = static_cast<Eigen::Index>(block);
  ComplexMatrix gathered(nt, nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    for (Eigen::Index t = 0; t < nt; ++t) gathered(t, b) = state.amplitude(bases[b] + offsets[t]);
  }
  const ComplexMatrix mixed = u.matrix() * gathered;
  ComplexVector out(state.amplitudes().size());
  for (Eigen::Index b = 0; b < nb; ++b) {
    for (Eigen::Index t = 0; t < nt; ++t) out[static_cast<Eigen::Index>(bases[b] + offsets[t])] = mixed(t, b);
  }
  return PureState::assume_normalized(state.dims(), std::move(out));
}

inline PureState apply_unitary(const PureState& state, const UnitaryMatrix& u, std::initializer_list<int> targets) {
  return apply_unitary(state, u, std::span<const int>(targets.begin(), targets.size()));
}

/// Reduced density matrix of one subsystem.
inline DensityMatrix partial_trace(const PureState& state, int keep) {
  detail::check_subsystem(state, keep);
  const ComplexMatrix m = detail::bipartite_matrix(state, {keep});
  ComplexMatrix rho = m * m.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

/// <target| rho |target>, clamped to [0, 1].
inline double fidelity(const DensityMatrix& rho, const TargetState& target) {
  if (rho.dim() != target.dim()) throw std::invalid_argument("fidelity dimension mismatch");
  const Complex f = target.amplitudes().dot(rho.matrix() * target.amplitudes());
  if (std::abs(f.imag()) > tol::kFidelityImag) throw InvariantViolation("fidelity has a non-negligible imaginary part");
  return std::clamp(f.real(), 0.0, 1.0);
}

inline SchmidtForm schmidt_decompose(const ChannelState& channel) { return channel.schmidt(); }

/// Number of singular values above `cutoff` across the cut partition | rest.
inline int schmidt_rank(const PureState& state, const std::vector<int>& partition, double cutoff) {
  if (partition.empty() || static_cast<int>(partition.size()) >= state.num_subsystems()) {
    throw std::invalid_argument("partition must be a nonempty proper subset of subsystems");
  }
  std::vector<int> sorted = partition;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("partition has repeated subsystems");
  }
  for (int k : sorted) detail::check_subsystem(state, k);
  const ComplexMatrix m = detail::bipartite_matrix(state, sorted);
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return static_cast<int>((svd.singularValues().array() > cutoff).count());
}

/// Pure state of subsystem `keep` when the register factorizes across
/// {keep} | rest; std::nullopt otherwise. The global phase is fixed so the
/// largest amplitude is real and positive.
inline std::optional<PureState> extract_factor(const PureState& state, int keep, double cutoff = tol::kRank) {
  detail::check_subsystem(state, keep);
  const ComplexMatrix m = detail::bipartite_matrix(state, {keep});
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  if (s.size() > 1 && s[1] > cutoff) return std::nullopt;
  ComplexVector v = svd.matrixU().col(0);
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  v *= std::polar(1.0, -std::arg(v[arg]));
  return PureState::assume_normalized({state.dims()[keep]}, v / v.norm());
}

}  // namespace drsp
