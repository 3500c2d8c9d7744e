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

#include "drsp/measurement.hpp"

#include <cmath>
#include <numbers>

#include "drsp/protocols.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace drsp;
using drsp::testing::Gen;
using drsp::testing::max_diff;

namespace {

ComplexVector vec(std::initializer_list<Complex> xs) {
  ComplexVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (Complex x : xs) v[i++] = x;
  return v;
}

const double kR = 1.0 / std::numbers::sqrt2;

PureState bell() { return make_state({2, 2}, vec({kR, 0, 0, kR})); }

/// |count - n p| <= 3 sqrt(n p (1 - p)).
void expect_within_three_sigma(std::size_t count, std::size_t n, double p) {
  const double sigma = std::sqrt(static_cast<double>(n) * p * (1 - p));
  EXPECT_LE(std::abs(static_cast<double>(count) - static_cast<double>(n) * p), 3 * sigma)
      << "count " << count << " of " << n << " at p = " << p;
}

}  // namespace

TEST(measure_qudit, basis_state_is_certain) {
  for (double draw : {0.0, 0.5, 0.999999}) {
    auto m = measure_qudit(basis_state({2}, {0}), 0, draw);
    EXPECT_EQ(m.outcome, 0);
    EXPECT_DOUBLE_EQ(m.probability, 1.0);
  }
}

TEST(measure_qudit, inverse_cdf_boundary) {
  auto s = make_state({2}, vec({0.6, 0.8}));
  auto m = measure_qudit(s, 0, 0.35);
  EXPECT_EQ(m.outcome, 0);
  EXPECT_NEAR(m.probability, 0.36, 1e-15);
  EXPECT_NEAR(std::abs(m.collapsed.amplitude(0)), 1.0, 1e-15);
  EXPECT_EQ(measure_qudit(s, 0, 0.37).outcome, 1);
}

TEST(measure_qudit, bell_upper_half_collapses_to_11) {
  auto m = measure_qudit(bell(), 0, 0.7);
  EXPECT_EQ(m.outcome, 1);
  EXPECT_NEAR(std::abs(m.collapsed.amplitude(3)), 1.0, 1e-15);
}

TEST(measure_qudit, rejects_bad_arguments) {
  EXPECT_THROW(measure_qudit(bell(), 2, 0.1), std::out_of_range);
  EXPECT_THROW(measure_qudit(bell(), 0, 1.0), std::invalid_argument);
  EXPECT_THROW(measure_qudit(bell(), 0, -0.1), std::invalid_argument);
}

TEST(measure_qudit, probabilities_sum_to_one_and_branches_are_orthogonal) {
  Gen g(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<int> dims = {g.integer(2, 4), g.integer(2, 4), g.integer(2, 3)};
    const int n = dims[0] * dims[1] * dims[2];
    auto s = make_state(dims, g.unit_vector(n));
    const int index = g.integer(0, 2);
    const auto p = marginal_probabilities(s, index);
    double total = 0.0;
    for (double x : p) total += x;
    ASSERT_NEAR(total, 1.0, 1e-12);
    std::vector<ComplexVector> branches;
    for (int k = 0; k < dims[static_cast<std::size_t>(index)]; ++k) {
      auto m = project(s, index, k, p[static_cast<std::size_t>(k)]);
      ASSERT_NEAR(m.collapsed.norm(), 1.0, 1e-12);
      branches.push_back(m.collapsed.amplitudes());
    }
    for (std::size_t i = 0; i < branches.size(); ++i)
      for (std::size_t j = i + 1; j < branches.size(); ++j) ASSERT_LT(std::abs(branches[i].dot(branches[j])), 1e-12);
  }
}

TEST(select_outcome, skips_zero_probability_outcomes) {
  EXPECT_EQ(select_outcome({0.0, 1.0}, 0.0), 1);
  EXPECT_EQ(select_outcome({0.5, 0.0, 0.5}, 0.5), 2);
  EXPECT_EQ(select_outcome({0.5, 0.5 - 1e-16, 0.0}, 0.9999999999999999), 1);
}

TEST(sample_counts, basis_state) {
  auto hist = sample_counts([](std::uint64_t) { return basis_state({2}, {0}); }, {0}, 100, 5);
  EXPECT_EQ(hist.shots, 100u);
  ASSERT_EQ(hist.counts.size(), 1u);
  EXPECT_EQ(hist.counts.at({0}), 100u);
}

TEST(sample_counts, bell_pairs_are_correlated) {
  const std::size_t n = 100000;
  auto hist = sample_counts([](std::uint64_t) { return bell(); }, {0, 1}, n, 42);
  ASSERT_EQ(hist.counts.size(), 2u);
  EXPECT_EQ(hist.counts.at({0, 0}) + hist.counts.at({1, 1}), n);
  expect_within_three_sigma(hist.counts.at({0, 0}), n, 0.5);
}

TEST(sample_counts, drsp_ancilla_factor_follows_channel_weights) {
  const auto prep = prepare_optimal_drsp(ChannelState::diagonal(vec({0.6, 0.8})), TargetState(vec({0.6, 0.8})));
  const PureState pre = prep.pre_measurement();
  const std::size_t n = 100000;
  auto hist = sample_counts([&](std::uint64_t) { return pre; }, {kA, kC}, n, 7);
  std::size_t total = 0;
  for (const auto& [k, v] : hist.counts) total += v;
  EXPECT_EQ(total, n);
  // A and C are perfectly correlated; weights are the squared Schmidt amplitudes.
  EXPECT_EQ(hist.counts.size(), 2u);
  expect_within_three_sigma(hist.counts.at({0, 0}), n, 0.36);
  expect_within_three_sigma(hist.counts.at({1, 1}), n, 0.64);
}

TEST(sample_counts, reproducible_and_thread_count_independent) {
  Gen g(19);
  const PureState s = make_state({3, 2}, g.unit_vector(6));
  auto prep = [&](std::uint64_t key) {
    // Preparation randomness uses its own key: flip qutrit 0 half the time.
    if (rng::uniform(key, 0) < 0.5) return s;
    return apply_unitary(s, shift_gate(3), {0});
  };
  auto a = sample_counts(prep, {0, 1}, 20000, 99, 1);
  auto b = sample_counts(prep, {0, 1}, 20000, 99, 1);
  auto c = sample_counts(prep, {0, 1}, 20000, 99, 4);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.counts, c.counts);
  EXPECT_EQ(a.to_csv(), c.to_csv());
  EXPECT_NE(a.counts, sample_counts(prep, {0, 1}, 20000, 100, 1).counts);
  EXPECT_THROW(sample_counts(prep, {0}, 0, 1), std::invalid_argument);
}

TEST(outcome_histogram, csv_layout) {
  OutcomeHistogram h;
  h.shots = 4;
  h.counts[{0, 1}] = 1;
  h.counts[{1, 1}] = 3;
  EXPECT_EQ(h.to_csv(), "outcome,count,frequency\n0:1,1,0.25\n1:1,3,0.75\n");
}

TEST(tomography_qubit, basis_state) {
  auto rho = tomography_qubit([](std::uint64_t) { return basis_state({2}, {0}); }, 10000, 3);
  ComplexMatrix want = ComplexMatrix::Zero(2, 2);
  want(0, 0) = 1.0;
  EXPECT_LT(max_diff(rho.matrix(), want), 0.02);
}

TEST(tomography_qubit, random_flips_look_maximally_mixed) {
  auto prep = [](std::uint64_t key) { return basis_state({2}, {rng::uniform(key, 0) < 0.5 ? 0 : 1}); };
  auto rho = tomography_qubit(prep, 10000, 4);
  EXPECT_LT(max_diff(rho.matrix(), 0.5 * ComplexMatrix::Identity(2, 2)), 0.02);
}

TEST(tomography_qubit, recovers_drsp_output) {
  const TargetState target(vec({0.6, std::polar(0.8, std::numbers::pi / 3)}));
  const auto prep = prepare_optimal_drsp(ChannelState::diagonal(vec({0.6, 0.8})), target);
  auto bob_output = [&](std::uint64_t key) {
    const ProtocolResult r = complete_drsp(prep, key);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(r.bob_state.matrix());
    return make_state({2}, eig.eigenvectors().col(1));
  };
  auto rho = tomography_qubit(bob_output, 100000, 5);
  EXPECT_GE(fidelity(rho, target), 0.995);
}

TEST(tomography_qubit, rejects_non_qubits) {
  EXPECT_THROW(tomography_qubit([](std::uint64_t) { return basis_state({3}, {0}); }, 10, 1), std::invalid_argument);
  EXPECT_THROW(tomography_qubit([](std::uint64_t) { return basis_state({2}, {0}); }, 0, 1), std::invalid_argument);
}

TEST(project_to_density, clips_negative_eigenvalues) {
  ComplexMatrix m(2, 2);
  m << 1.1, 0, 0, -0.1;
  auto rho = project_to_density(m);
  EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(rho(1, 1).real(), 0.0, 1e-15);
}
