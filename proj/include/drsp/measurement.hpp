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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "drsp/config.hpp"
#include "drsp/core.hpp"
#include "drsp/format.hpp"
#include "drsp/gates.hpp"
#include "drsp/rng.hpp"

namespace drsp {

/// Born-rule marginal of one subsystem, in ascending basis order.
inline std::vector<double> marginal_probabilities(const PureState& state, int index) {
  detail::check_subsystem(state, index);
  std::vector<double> p(static_cast<std::size_t>(state.dims()[index]), 0.0);
  for (std::size_t flat = 0; flat < state.size(); ++flat) {
    p[static_cast<std::size_t>(state.digit(flat, index))] += std::norm(state.amplitude(flat));
  }
  return p;
}

/// Inverse CDF over `probabilities`; never returns a zero-probability outcome.
inline int select_outcome(const std::vector<double>& probabilities, double draw) {
  double cumulative = 0.0;
  int last_nonzero = -1;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (probabilities[k] <= 0.0) continue;
    cumulative += probabilities[k];
    last_nonzero = static_cast<int>(k);
    if (draw < cumulative) return last_nonzero;
  }
  // Rounding left the total just under the draw.
  return last_nonzero;
}

struct MeasurementOutcome {
  int outcome;
  double probability;
  PureState collapsed;
};

/// Projects subsystem `index` onto |outcome> and renormalizes.
inline MeasurementOutcome project(const PureState& state, int index, int outcome, double probability) {
  if (!(probability > 0.0)) throw std::invalid_argument("cannot project onto a zero-probability outcome");
  ComplexVector out = ComplexVector::Zero(state.amplitudes().size());
  const double scale = 1.0 / std::sqrt(probability);
  for (std::size_t flat = 0; flat < state.size(); ++flat) {
    if (state.digit(flat, index) == outcome) out[static_cast<Eigen::Index>(flat)] = state.amplitude(flat) * scale;
  }
  return {outcome, probability, PureState::assume_normalized(state.dims(), std::move(out))};
}

/// Computational-basis measurement of one subsystem driven by an explicit
/// uniform draw in [0, 1).
inline MeasurementOutcome measure_qudit(const PureState& state, int index, double draw) {
  if (!(draw >= 0.0 && draw < 1.0)) throw std::invalid_argument("draw must lie in [0, 1)");
  const auto p = marginal_probabilities(state, index);
  const int k = select_outcome(p, draw);
  return project(state, index, k, p[static_cast<std::size_t>(k)]);
}

struct OutcomeHistogram {
  std::size_t shots = 0;
  std::map<std::vector<int>, std::size_t> counts;

  double frequency(const std::vector<int>& outcome) const {
    const auto it = counts.find(outcome);
    return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(shots);
  }

  /// outcome,count,frequency with outcome tuples colon-separated.
  std::string to_csv() const {
    std::string out = "outcome,count,frequency\n";
    for (const auto& [outcome, count] : counts) {
      for (std::size_t i = 0; i < outcome.size(); ++i) {
        if (i) out += ':';
        out += std::to_string(outcome[i]);
      }
      out += ',' + std::to_string(count) + ',' +
             format_number(static_cast<double>(count) / static_cast<double>(shots)) + '\n';
    }
    return out;
  }
};

/// Produces a fresh state for one shot from that shot's key.
using StatePreparation = std::function<PureState(std::uint64_t)>;

/// Key handed to the preparation of shot `shot`. Measurement draws for the
/// same shot use sibling counters, so they never alias preparation draws.
inline std::uint64_t shot_key(std::uint64_t seed, std::uint64_t shot) { return rng::derive(seed, shot); }

/// Joint histogram of `subsystems` (measured in listed order) over
/// independent repetitions. Shots are split into fixed blocks, so the result
/// does not depend on `threads`.
inline OutcomeHistogram sample_counts(const StatePreparation& prep, const std::vector<int>& subsystems,
                                      std::size_t shots, std::uint64_t seed, unsigned threads = 1) {
  if (shots == 0) throw std::invalid_argument("shots must be at least 1");
  if (subsystems.empty()) throw std::invalid_argument("no subsystems to measure");

  auto run_range = [&](std::size_t begin, std::size_t end) {
    std::map<std::vector<int>, std::size_t> local;
    std::vector<int> outcome(subsystems.size());
    for (std::size_t shot = begin; shot < end; ++shot) {
      const std::uint64_t key = shot_key(seed, shot);
      PureState state = prep(rng::derive(key, 0));
      for (std::size_t j = 0; j < subsystems.size(); ++j) {
        auto m = measure_qudit(state, subsystems[j], rng::uniform(key, 1 + j));
        outcome[j] = m.outcome;
        state = std::move(m.collapsed);
      }
      ++local[outcome];
    }
    return local;
  };

  OutcomeHistogram hist;
  hist.shots = shots;
  threads = std::max(1u, threads);
  if (threads == 1) {
    hist.counts = run_range(0, shots);
    return hist;
  }
  std::vector<std::map<std::vector<int>, std::size_t>> partial(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      partial[t] = run_range(shots * t / threads, shots * (t + 1) / threads);
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& part : partial) {
    for (const auto& [k, v] : part) hist.counts[k] += v;
  }
  return hist;
}

/// Nearest unit-trace PSD matrix by eigenvalue clipping.
inline DensityMatrix project_to_density(const ComplexMatrix& estimate) {
  const ComplexMatrix herm = 0.5 * (estimate + estimate.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(herm);
  RealVector vals = eig.eigenvalues().cwiseMax(0.0);
  const double total = vals.sum();
  if (!(total > 0.0)) throw std::invalid_argument("estimate has no positive spectrum");
  vals /= total;
  ComplexMatrix rho = eig.eigenvectors() * vals.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

/// Single-qubit state tomography from Stokes estimates in the Z, X and Y
/// bases. Each shot of basis b uses the key derive(derive(seed, b), shot).
inline DensityMatrix tomography_qubit(const StatePreparation& prep, std::size_t shots_per_basis, std::uint64_t seed) {
  if (shots_per_basis == 0) throw std::invalid_argument("shots per basis must be at least 1");
  const double r = 1.0 / std::numbers::sqrt2;
  ComplexMatrix h(2, 2);
  h << r, r, r, -r;
  ComplexMatrix sdg_then_h(2, 2);  // H * S^dagger
  sdg_then_h << r, Complex(0, -r), r, Complex(0, r);
  const UnitaryMatrix to_z = UnitaryMatrix::identity(2);
  const UnitaryMatrix to_x(h);
  const UnitaryMatrix to_y(sdg_then_h);
  const UnitaryMatrix* changes[3] = {&to_z, &to_x, &to_y};

  double stokes[3] = {0.0, 0.0, 0.0};
  for (int b = 0; b < 3; ++b) {
    const std::uint64_t basis_seed = rng::derive(seed, static_cast<std::uint64_t>(b));
    long long balance = 0;
    for (std::size_t shot = 0; shot < shots_per_basis; ++shot) {
      const std::uint64_t key = shot_key(basis_seed, shot);
      const PureState state = prep(rng::derive(key, 0));
      if (state.num_subsystems() != 1 || state.dims()[0] != 2) {
        throw std::invalid_argument("tomography_qubit needs a single qubit");
      }
      const PureState rotated = apply_unitary(state, *changes[b], {0});
      balance += measure_qudit(rotated, 0, rng::uniform(key, 1)).outcome == 0 ? 1 : -1;
    }
    stokes[b] = static_cast<double>(balance) / static_cast<double>(shots_per_basis);
  }
  const double sz = stokes[0];
  const double sx = stokes[1];
  const double sy = stokes[2];
  ComplexMatrix rho(2, 2);
  rho << 0.5 * (1.0 + sz), 0.5 * Complex(sx, -sy), 0.5 * Complex(sx, sy), 0.5 * (1.0 - sz);
  return project_to_density(rho);
}

}  // namespace drsp
