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

// Both remote state preparation protocols, run end to end on the statevector
// simulator. Registers are always ordered (A, B, C): A is Alice's half of
// the channel, B is Bob's, C is Alice's ancilla.
//
// A run is split into a deterministic preparation (every gate up to the
// final measurements) and a seeded measurement phase, so batch sampling can
// reuse one preparation across many seeds.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drsp/config.hpp"
#include "drsp/core.hpp"
#include "drsp/gates.hpp"
#include "drsp/ledger.hpp"
#include "drsp/measurement.hpp"
#include "drsp/rng.hpp"

namespace drsp {

inline constexpr int kA = 0;
inline constexpr int kB = 1;
inline constexpr int kC = 2;

/// Channel rotated to diagonal form. The original channel equals
/// (alice (x) bob) applied to `diagonal`, i.e. lambda = alice * D * bob^T.
struct NormalizedChannel {
  ChannelState diagonal;
  UnitaryMatrix alice;
  UnitaryMatrix bob;
};

/// Structurally diagonal channels keep their basis order and only have their
/// phases moved into Alice's correction. Everything else goes through the
/// SVD and comes out with descending Schmidt coefficients.
inline NormalizedChannel schmidt_normalize_channel(const ChannelState& channel) {
  const int d = channel.dim();
  if (channel.is_structurally_diagonal()) {
    ComplexVector mags(d);
    ComplexVector phases(d);
    for (int m = 0; m < d; ++m) {
      const Complex c = channel.coefficients()(m, m);
      mags[m] = std::abs(c);
      phases[m] = std::abs(c) > 0.0 ? c / std::abs(c) : Complex(1.0);
    }
    return {ChannelState::diagonal(mags), UnitaryMatrix(ComplexMatrix(phases.asDiagonal())),
            UnitaryMatrix::identity(d)};
  }
  const SchmidtForm& form = channel.schmidt();
  return {ChannelState::diagonal(form.coefficients.cast<Complex>()), form.left,
          UnitaryMatrix(form.right.matrix().conjugate())};
}

/// True iff `state` has Schmidt rank at most 1 across {bob_index} | rest.
inline bool verify_factorization(const PureState& state, int bob_index, double cutoff = tol::kRank) {
  if (state.num_subsystems() < 2) throw std::invalid_argument("factorization check needs two or more subsystems");
  detail::check_subsystem(state, bob_index);
  return schmidt_rank(state, {bob_index}, cutoff) <= 1;
}

enum class ProtocolKind { kConventional, kDrsp };

/// Conventional: 2 * (smaller Schmidt coefficient)^2. DRSP: 1.
inline double theoretical_success_probability(ProtocolKind kind, const ChannelState& channel) {
  if (kind == ProtocolKind::kDrsp) return 1.0;
  if (channel.dim() != 2) throw std::invalid_argument("conventional success probability is defined for d = 2");
  const double smaller = channel.schmidt().coefficients[1];
  return 2.0 * smaller * smaller;
}

struct ProtocolResult {
  bool succeeded = false;
  // Keyed by subsystem label; the conventional delivery stage adds
  // "C:delivery" and "A:delivery".
  std::map<std::string, int> outcomes;
  DensityMatrix bob_state;
  double fidelity_to_target = 0.0;
  std::vector<PureState> trace;
  OwnershipLedger ledger;
};

/// Every gate of a DRSP run, before the Step V measurements.
struct DrspPreparation {
  TargetState target;
  std::vector<PureState> trace;  // phi_0 ... phi_4
  OwnershipLedger ledger;
  int measurement_step;

  const PureState& pre_measurement() const { return trace.back(); }
};

namespace detail {

/// Draw counter for the j-th measurement of `step`.
inline std::uint64_t draw_counter(int step, int j) { return static_cast<std::uint64_t>(step) * 16 + static_cast<std::uint64_t>(j); }

/// Runs Steps 0-IV on an (A, B, C) register whose AB part is already
/// diagonal in the computational basis and whose C is |0>.
inline DrspPreparation drsp_from_aligned(PureState state, const TargetState& target, OwnershipLedger ledger,
                                         int first_step) {
  const int d = target.dim();
  const int s0 = first_step;
  const auto blocks = branch_blocks(target);
  std::vector<UnitaryMatrix> residual;
  residual.reserve(blocks.size());
  const UnitaryMatrix first_adjoint = blocks.front().adjoint();
  for (const auto& b : blocks) residual.push_back(b * first_adjoint);
  const UnitaryMatrix information = blocks.front();
  const UnitaryMatrix branch_phase = assemble_branch_controlled(residual);
  const UnitaryMatrix add = controlled_add(d, ShiftDirection::kAdd);
  const UnitaryMatrix subtract = controlled_add(d, ShiftDirection::kSubtract);

  std::vector<PureState> trace;
  trace.reserve(5);

  // Step 0: couple the ancilla, C <- C + A.
  state = apply_unitary(state, add, {kA, kC});
  ledger.record_gate(s0, Party::kAlice, "AC", gate_name(GateKind::kControlledAdd));
  trace.push_back(state);

  // Step I: the information unitary on A (branch 0 of the fused gate).
  state = apply_unitary(state, information, {kA});
  ledger.record_gate(s0 + 1, Party::kAlice, "A", gate_name(GateKind::kCompletion));
  trace.push_back(state);

  // Step II: C-controlled correction completing every other branch.
  state = apply_unitary(state, branch_phase, {kA, kC});
  ledger.record_gate(s0 + 2, Party::kAlice, "AC", gate_name(GateKind::kBranchControlled));
  trace.push_back(state);

  // Step III: A travels to Bob, who adds it into B.
  ledger.record_transmission(s0 + 3, Party::kAlice, 'A');
  state = apply_unitary(state, add, {kA, kB});
  ledger.record_gate(s0 + 3, Party::kBob, "AB", gate_name(GateKind::kControlledAdd));
  trace.push_back(state);

  // Step IV: A <- A - B, leaving B in the target state.
  state = apply_unitary(state, subtract, {kB, kA});
  ledger.record_gate(s0 + 4, Party::kBob, "BA", gate_name(GateKind::kControlledSubtract));
  trace.push_back(std::move(state));

  return {target, std::move(trace), std::move(ledger), s0 + 5};
}

inline PureState with_ancilla(const ChannelState& channel) {
  return tensor(channel.as_state(), basis_state({channel.dim()}, {0}));
}

/// Applies the local Schmidt alignment, recording one gate per party.
inline PureState align(PureState state, const UnitaryMatrix& on_a, const UnitaryMatrix& on_b, OwnershipLedger& ledger,
                       int step) {
  state = apply_unitary(state, on_a, {kA});
  ledger.record_gate(step, Party::kAlice, "A", gate_name(GateKind::kLocalBasis));
  state = apply_unitary(state, on_b, {kB});
  ledger.record_gate(step, Party::kBob, "B", gate_name(GateKind::kLocalBasis));
  return state;
}

}  // namespace detail

inline DrspPreparation prepare_optimal_drsp(const ChannelState& channel, const TargetState& target) {
  if (channel.dim() != target.dim()) throw std::invalid_argument("channel and target dimensions differ");
  const NormalizedChannel normalized = schmidt_normalize_channel(channel);
  OwnershipLedger ledger = OwnershipLedger::two_party();
  PureState state = detail::align(detail::with_ancilla(channel), normalized.alice.adjoint(),
                                  normalized.bob.adjoint(), ledger, 0);
  return detail::drsp_from_aligned(std::move(state), target, std::move(ledger), 0);
}

/// Step V on a prepared run: Alice measures C and announces the outcome,
/// Bob measures A.
inline ProtocolResult complete_drsp(const DrspPreparation& prep, std::uint64_t seed) {
  const int step = prep.measurement_step;
  OwnershipLedger ledger = prep.ledger;
  const auto mc = measure_qudit(prep.pre_measurement(), kC, rng::uniform(seed, detail::draw_counter(step, 0)));
  ledger.record_measurement(step, Party::kAlice, 'C', mc.outcome);
  ledger.record_message(step, Party::kAlice, 'C', mc.outcome);
  const auto ma = measure_qudit(mc.collapsed, kA, rng::uniform(seed, detail::draw_counter(step, 1)));
  ledger.record_measurement(step, Party::kBob, 'A', ma.outcome);
  DensityMatrix bob = partial_trace(ma.collapsed, kB);
  const double f = fidelity(bob, prep.target);
  return {true, {{"C", mc.outcome}, {"A", ma.outcome}}, std::move(bob), f, prep.trace, std::move(ledger)};
}

/// Deterministic remote state preparation over an arbitrary pure channel.
inline ProtocolResult run_optimal_drsp(const ChannelState& channel, const TargetState& target, std::uint64_t seed) {
  return complete_drsp(prepare_optimal_drsp(channel, target), seed);
}

/// Filter stage of the conventional protocol, up to the measurement of C.
struct ConventionalPreparation {
  TargetState target;
  double alpha;  // smaller Schmidt coefficient
  double beta;
  std::vector<PureState> trace;  // after C_AC, after the filter, after C_AC again
  OwnershipLedger ledger;

  static constexpr int kMeasurementStep = 3;
  static constexpr int kDeliveryStep = 4;

  const PureState& pre_measurement() const { return trace.back(); }
};

inline ConventionalPreparation prepare_conventional_rsp(const ChannelState& channel, const TargetState& target) {
  if (channel.dim() != 2 || target.dim() != 2) throw std::invalid_argument("conventional RSP is defined for d = 2");
  const NormalizedChannel normalized = schmidt_normalize_channel(channel);
  double c0 = std::abs(normalized.diagonal.coefficients()(0, 0));
  double c1 = std::abs(normalized.diagonal.coefficients()(1, 1));
  UnitaryMatrix on_a = normalized.alice.adjoint();
  UnitaryMatrix on_b = normalized.bob.adjoint();
  if (c0 > c1) {
    // Relabel so the smaller coefficient sits on |00>.
    on_a = shift_gate(2) * on_a;
    on_b = shift_gate(2) * on_b;
    std::swap(c0, c1);
  }

  OwnershipLedger ledger = OwnershipLedger::two_party();
  PureState state = detail::align(detail::with_ancilla(channel), on_a, on_b, ledger, 0);
  const UnitaryMatrix cnot = controlled_add(2, ShiftDirection::kAdd);
  std::vector<PureState> trace;

  state = apply_unitary(state, cnot, {kA, kC});
  ledger.record_gate(0, Party::kAlice, "AC", gate_name(GateKind::kControlledAdd));
  trace.push_back(state);
  state = apply_unitary(state, filter_unitary(c0, c1), {kA, kC});
  ledger.record_gate(1, Party::kAlice, "AC", gate_name(GateKind::kFilter));
  trace.push_back(state);
  state = apply_unitary(state, cnot, {kA, kC});
  ledger.record_gate(2, Party::kAlice, "AC", gate_name(GateKind::kControlledAdd));
  trace.push_back(std::move(state));
  return {target, c0, c1, std::move(trace), std::move(ledger)};
}

/// P(C = 0) read off the pre-measurement amplitudes.
inline double conventional_success_amplitude_weight(const ConventionalPreparation& prep) {
  return marginal_probabilities(prep.pre_measurement(), kC)[0];
}

namespace detail {

/// Delivery stage after a successful filter: C is |0> again and AB is
/// maximally entangled, so the deterministic steps finish the job.
inline DrspPreparation conventional_delivery(const ConventionalPreparation& prep, const PureState& collapsed,
                                             OwnershipLedger ledger) {
  return drsp_from_aligned(collapsed, prep.target, std::move(ledger), ConventionalPreparation::kDeliveryStep);
}

}  // namespace detail

inline ProtocolResult complete_conventional_rsp(const ConventionalPreparation& prep, std::uint64_t seed) {
  const int step = ConventionalPreparation::kMeasurementStep;
  OwnershipLedger ledger = prep.ledger;
  const auto mc = measure_qudit(prep.pre_measurement(), kC, rng::uniform(seed, detail::draw_counter(step, 0)));
  ledger.record_measurement(step, Party::kAlice, 'C', mc.outcome);
  ledger.record_message(step, Party::kAlice, 'C', mc.outcome);
  if (mc.outcome != 0) {
    DensityMatrix bob = partial_trace(mc.collapsed, kB);
    const double f = fidelity(bob, prep.target);
    return {false, {{"C", mc.outcome}}, std::move(bob), f, prep.trace, std::move(ledger)};
  }
  const DrspPreparation delivery = detail::conventional_delivery(prep, mc.collapsed, std::move(ledger));
  ProtocolResult result = complete_drsp(delivery, seed);
  result.outcomes = {{"C", mc.outcome},
                     {"C:delivery", result.outcomes.at("C")},
                     {"A:delivery", result.outcomes.at("A")}};
  std::vector<PureState> trace = prep.trace;
  trace.insert(trace.end(), result.trace.begin(), result.trace.end());
  result.trace = std::move(trace);
  return result;
}

/// Conventional probabilistic RSP: filter the channel towards maximal
/// entanglement, measure the ancilla, and deliver the target only when the
/// ancilla reads 0.
inline ProtocolResult run_conventional_rsp(const ChannelState& channel, const TargetState& target,
                                           std::uint64_t seed) {
  return complete_conventional_rsp(prepare_conventional_rsp(channel, target), seed);
}

/// Outcome of one seeded measurement phase, without the state bookkeeping.
struct BranchSample {
  bool succeeded;
  double fidelity;
  int filter_outcome;  // -1 for DRSP
  int c_outcome;       // -1 when the run stopped at the filter
  int a_outcome;
};

/// Every measurement branch of a prepared run, enumerated once. sample()
/// reproduces the outcome and fidelity that the complete_* function would
/// give for the same seed, at the cost of two table lookups.
class BranchTable {
 public:
  static BranchTable for_drsp(const DrspPreparation& prep) {
    BranchTable t;
    t.first_step_ = prep.measurement_step;
    t.fill_drsp(prep);
    return t;
  }

  static BranchTable for_conventional(const ConventionalPreparation& prep) {
    BranchTable t;
    t.conventional_ = true;
    const PureState& pre = prep.pre_measurement();
    t.filter_probabilities_ = marginal_probabilities(pre, kC);
    t.filter_fidelity_.assign(t.filter_probabilities_.size(), 0.0);
    for (int c = 1; c < static_cast<int>(t.filter_probabilities_.size()); ++c) {
      const double p = t.filter_probabilities_[static_cast<std::size_t>(c)];
      if (p > 0.0) {
        t.filter_fidelity_[static_cast<std::size_t>(c)] =
            fidelity(partial_trace(project(pre, kC, c, p).collapsed, kB), prep.target);
      }
    }
    if (t.filter_probabilities_[0] > 0.0) {
      const auto mc = project(pre, kC, 0, t.filter_probabilities_[0]);
      OwnershipLedger ledger = prep.ledger;
      ledger.record_measurement(ConventionalPreparation::kMeasurementStep, Party::kAlice, 'C', 0);
      ledger.record_message(ConventionalPreparation::kMeasurementStep, Party::kAlice, 'C', 0);
      t.fill_drsp(detail::conventional_delivery(prep, mc.collapsed, std::move(ledger)));
    }
    return t;
  }

  BranchSample sample(std::uint64_t seed) const {
    if (conventional_) {
      const int c = select_outcome(filter_probabilities_,
                                   rng::uniform(seed, detail::draw_counter(ConventionalPreparation::kMeasurementStep, 0)));
      if (c != 0) return {false, filter_fidelity_[static_cast<std::size_t>(c)], c, -1, -1};
    }
    const int c = select_outcome(c_probabilities_, rng::uniform(seed, detail::draw_counter(first_step_, 0)));
    const auto& branch = a_branches_[static_cast<std::size_t>(c)];
    const int a = select_outcome(branch.probabilities, rng::uniform(seed, detail::draw_counter(first_step_, 1)));
    return {true, branch.fidelity[static_cast<std::size_t>(a)], conventional_ ? 0 : -1, c, a};
  }

 private:
  struct ABranch {
    std::vector<double> probabilities;
    std::vector<double> fidelity;
  };

  void fill_drsp(const DrspPreparation& prep) {
    first_step_ = prep.measurement_step;
    const PureState& pre = prep.pre_measurement();
    c_probabilities_ = marginal_probabilities(pre, kC);
    a_branches_.assign(c_probabilities_.size(), {});
    for (int c = 0; c < static_cast<int>(c_probabilities_.size()); ++c) {
      const double pc = c_probabilities_[static_cast<std::size_t>(c)];
      if (!(pc > 0.0)) continue;
      const PureState after_c = project(pre, kC, c, pc).collapsed;
      ABranch& branch = a_branches_[static_cast<std::size_t>(c)];
      branch.probabilities = marginal_probabilities(after_c, kA);
      branch.fidelity.assign(branch.probabilities.size(), 0.0);
      for (int a = 0; a < static_cast<int>(branch.probabilities.size()); ++a) {
        const double pa = branch.probabilities[static_cast<std::size_t>(a)];
        if (!(pa > 0.0)) continue;
        branch.fidelity[static_cast<std::size_t>(a)] =
            fidelity(partial_trace(project(after_c, kA, a, pa).collapsed, kB), prep.target);
      }
    }
  }

  bool conventional_ = false;
  int first_step_ = 0;
  std::vector<double> filter_probabilities_;
  std::vector<double> filter_fidelity_;
  std::vector<double> c_probabilities_;
  std::vector<ABranch> a_branches_;
};

}  // namespace drsp
