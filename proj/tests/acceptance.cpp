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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Criteria 1, 2 and 9 drive the built executable.

#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "drsp/gates.hpp"
#include "drsp/measurement.hpp"
#include "drsp/protocols.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace drsp;
using drsp::testing::Gen;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail, double seconds) {
  std::printf("[%s] AC%d %s: %s (%.1fs)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

/// Runs `fn`, which fills `detail` and returns pass/fail, and reports it.
void criterion(int id, const std::string& what, const std::function<bool(std::string&)>& fn) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, ok, what, detail, secs);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("drsp_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(DRSP_BINARY) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::vector<std::vector<double>> read_csv(const std::string& text, std::string& header) {
  std::istringstream in(text);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      row.push_back(to_double(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double unitarity_error(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

constexpr std::size_t kSweepShots = 100000;
constexpr int kSweepPoints = 101;
const char* kSweepHeader = "theta,p_conventional_theory,p_conventional_empirical,p_drsp_theory,drsp_fidelity_mean";

}  // namespace

int main() {
  std::printf("drsp acceptance suite\n");

  // Criteria 1 and 2 share one sweep through the executable.
  std::string sweep_header;
  std::vector<std::vector<double>> sweep;
  std::string sweep_error;
  double sweep_seconds = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    const fs::path out = work_dir() / "sweep.csv";
    const int code = run_tool("sweep-theta --shots " + std::to_string(kSweepShots) + " --steps " +
                              std::to_string(kSweepPoints) + " --seed 20260101 --out " + out.string());
    sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (code != 0) {
      sweep_error = "sweep-theta exited with " + std::to_string(code);
    } else {
      try {
        sweep = read_csv(slurp(out), sweep_header);
      } catch (const std::exception& e) {
        sweep_error = e.what();
      }
    }
  }
  std::printf("  (sweep-theta, %d points x %zu shots, took %.1fs)\n", kSweepPoints, kSweepShots, sweep_seconds);

  criterion(1, "conventional success rate vs 2 sin^2(theta) within 3 sigma at >= 97/101 points", [&](std::string& d) {
    if (!sweep_error.empty()) return d = sweep_error, false;
    if (sweep_header != kSweepHeader || sweep.size() != kSweepPoints) return d = "unexpected sweep layout", false;
    int inside = 0;
    for (const auto& row : sweep) {
      const double theta = row[0];
      const double p = 2.0 * std::sin(theta) * std::sin(theta);
      const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(kSweepShots));
      // At the endpoints sigma vanishes and the rate must be exact.
      const double slack = std::max(3.0 * sigma, 1e-12);
      if (std::abs(row[1] - p) > 1e-11) return d = "theory column disagrees at theta " + fmt(theta), false;
      if (std::abs(row[2] - p) <= slack) ++inside;
    }
    d = std::to_string(inside) + "/" + std::to_string(sweep.size()) + " points inside";
    return inside >= 97;
  });

  criterion(2, "DRSP mean fidelity = 1 within 1e-9 at every sweep point", [&](std::string& d) {
    if (!sweep_error.empty()) return d = sweep_error, false;
    if (sweep.size() != kSweepPoints) return d = "unexpected sweep layout", false;
    double worst = 0.0;
    for (const auto& row : sweep) worst = std::max(worst, std::abs(row[4] - 1.0));
    const bool endpoints = sweep.front()[0] == 0.0 && std::abs(sweep.back()[0] - std::numbers::pi / 4) < 1e-11;
    d = "max |F - 1| = " + fmt(worst) + (endpoints ? ", grid includes 0 and pi/4" : ", grid endpoints missing");
    return endpoints && worst <= 1e-9;
  });

  criterion(3, "DRSP fidelity >= 1 - 1e-9 and success on 10^4 random triples for each d in {2,3,5,8}", [](std::string& d) {
    Gen g(3003);
    double worst = 1.0;
    std::size_t runs = 0, failed = 0;
    for (int dim : {2, 3, 5, 8}) {
      for (int i = 0; i < 10000; ++i) {
        const ChannelState channel(g.channel_matrix(dim));
        const TargetState target(g.unit_vector(dim));
        const auto r = run_optimal_drsp(channel, target, g.engine()());
        worst = std::min(worst, r.fidelity_to_target);
        if (!r.succeeded || r.fidelity_to_target < 1.0 - 1e-9) ++failed;
        ++runs;
      }
    }
    d = std::to_string(runs) + " runs, " + std::to_string(failed) + " failures, min fidelity 1 - " + fmt(1.0 - worst);
    return failed == 0 && runs == 40000;
  });

  criterion(4, "qubit walkthrough phi1..phi4 vs dense 8x8 evaluation within 1e-10 per C-branch phase", [](std::string& d) {
    const double alpha = 0.6, beta = 0.8, x0 = 0.6;
    const Complex x1 = std::polar(0.8, std::numbers::pi / 3);
    const auto r = run_optimal_drsp(ChannelState::diagonal((ComplexVector(2) << alpha, beta).finished()),
                                    TargetState((ComplexVector(2) << x0, x1).finished()), 4);
    const auto dense = drsp::testing::qubit_walkthrough_dense(alpha, beta, x0, x1);
    const auto closed = drsp::testing::qubit_walkthrough_closed_form(alpha, beta, x0, x1);
    double worst = 0.0, worst_closed = 0.0;
    for (std::size_t k = 1; k <= 4; ++k) {
      worst = std::max(worst, drsp::testing::max_diff_per_last_branch(r.trace[k].amplitudes(), dense[k], 2));
      worst_closed =
          std::max(worst_closed, drsp::testing::max_diff_per_last_branch(dense[k], closed[k - 1], 2));
    }
    d = "max deviation " + fmt(worst) + " (oracle vs closed forms " + fmt(worst_closed) + ")";
    return r.trace.size() == 5 && worst <= 1e-10 && worst_closed <= 1e-10;
  });

  criterion(5, "filter state alpha(|000>+|111>)+sqrt(b^2-a^2)|110> within 1e-10, P(C=0) = 2 alpha^2 within 1e-12",
            [](std::string& d) {
              Gen g(5005);
              double worst_state = 0.0, worst_measured = 0.0, worst_p = 0.0;
              using drsp::testing::ket3;
              for (int i = 0; i < 100; ++i) {
                const double t = g.uniform(0.0, std::numbers::pi / 4);
                const double a = std::sin(t), b = std::cos(t), s = std::sqrt(b * b - a * a);
                const auto prep = prepare_conventional_rsp(ChannelState::from_theta(t), TargetState(g.unit_vector(2)));
                const ComplexVector filtered = a * (ket3(0, 0, 0) + ket3(1, 1, 1)) + s * ket3(1, 1, 0);
                // The closing C_AC relabels C on the A = 1 terms.
                const ComplexVector measured = a * (ket3(0, 0, 0) + ket3(1, 1, 0)) + s * ket3(1, 1, 1);
                worst_state = std::max(worst_state, drsp::testing::max_diff(prep.trace[1].amplitudes(), filtered));
                worst_measured =
                    std::max(worst_measured, drsp::testing::max_diff(prep.pre_measurement().amplitudes(), measured));
                worst_p = std::max(worst_p, std::abs(conventional_success_amplitude_weight(prep) - 2 * a * a));
              }
              d = "100 pairs; filter state " + fmt(worst_state) + ", measured state " + fmt(worst_measured) +
                  ", P(C=0) " + fmt(worst_p);
              return worst_state <= 1e-10 && worst_measured <= 1e-10 && worst_p <= 1e-12;
            });

  criterion(6, "factorization true on phi4 for 10^4 runs, false on GHZ and generic phi3", [](std::string& d) {
    Gen g(6006);
    int phi4_true = 0, phi3_false = 0, generic = 0;
    for (int i = 0; i < 10000; ++i) {
      const int dim = g.integer(2, 6);
      const bool full = i % 2 == 0;
      const ChannelState channel(full ? g.unit_matrix(dim, dim) : g.channel_matrix(dim));
      const auto r = run_optimal_drsp(channel, TargetState(g.unit_vector(dim)), g.engine()());
      phi4_true += verify_factorization(r.trace[4], kB) ? 1 : 0;
      if (full) {
        ++generic;
        phi3_false += verify_factorization(r.trace[3], kB) ? 0 : 1;
      }
    }
    const ComplexVector ghz = (drsp::testing::ket3(0, 0, 0) + drsp::testing::ket3(1, 1, 1)) / std::numbers::sqrt2;
    const PureState ghz_state = make_state({2, 2, 2}, ghz);
    bool ghz_false = true;
    for (int k = 0; k < 3; ++k) ghz_false = ghz_false && !verify_factorization(ghz_state, k);
    d = "phi4 " + std::to_string(phi4_true) + "/10000, generic phi3 rejected " + std::to_string(phi3_false) + "/" +
        std::to_string(generic) + ", GHZ " + (ghz_false ? "rejected" : "accepted");
    return phi4_true == 10000 && phi3_false == generic && ghz_false;
  });

  criterion(7, "U^dagger U = I within 1e-12 for every gate builder, 1000 draws each, d = 2..8", [](std::string& d) {
    Gen g(7007);
    double worst = 0.0;
    std::size_t checked = 0;
    auto check = [&](const UnitaryMatrix& u) {
      worst = std::max(worst, unitarity_error(u.matrix()));
      ++checked;
    };
    for (int dim = 2; dim <= 8; ++dim) {
      for (int i = 0; i < 1000; ++i) {
        std::vector<int> shift(static_cast<std::size_t>(dim));
        for (int& s : shift) s = g.integer(0, dim - 1);
        check(controlled_add(dim, i % 2 ? ShiftDirection::kAdd : ShiftDirection::kSubtract, shift));
        Eigen::MatrixXd phases(dim, dim);
        for (int r = 0; r < dim; ++r)
          for (int c = 0; c < dim; ++c) phases(r, c) = g.uniform(-10.0, 10.0);
        check(controlled_phase(dim, phases));
        check(unitary_completion(g.unit_vector(dim), g.integer(0, dim - 1)));
        const TargetState target(g.unit_vector(dim));
        for (const auto& b : branch_blocks(target)) check(b);
        check(branch_controlled_unitary(target));
        check(shift_gate(dim));
      }
    }
    for (int i = 0; i < 1000; ++i) {
      const double t = g.uniform(0.0, std::numbers::pi / 4);
      check(filter_unitary(Complex(std::sin(t), 0.0), std::polar(std::cos(t), g.uniform(0.0, 6.3))));
    }
    d = std::to_string(checked) + " matrices, max residual " + fmt(worst);
    return worst <= 1e-12;
  });

  criterion(8, "tomography max-entry error exponent -0.5 +/- 0.1 over 1e2..1e5 shots", [](std::string& d) {
    // Bob's qubit after a DRSP run on a non-maximal channel.
    const TargetState target((ComplexVector(2) << 0.6, std::polar(0.8, 1.0)).finished());
    const auto prep = prepare_optimal_drsp(ChannelState::from_theta(0.4), target);
    const DensityMatrix exact = partial_trace(prep.pre_measurement(), kB);
    const auto factor = extract_factor(prep.pre_measurement(), kB);
    if (!factor) return d = "Bob's qubit does not factor", false;
    const PureState bob = *factor;
    const int seeds = 40;
    std::vector<double> xs, ys;
    std::string curve;
    for (std::size_t shots : {100u, 1000u, 10000u, 100000u}) {
      double mean = 0.0;
      for (int s = 0; s < seeds; ++s) {
        const auto rho = tomography_qubit([&](std::uint64_t) { return bob; }, shots, rng::derive(8008, s));
        mean += (rho.matrix() - exact.matrix()).cwiseAbs().maxCoeff();
      }
      mean /= seeds;
      xs.push_back(std::log10(static_cast<double>(shots)));
      ys.push_back(std::log10(mean));
      curve += (curve.empty() ? "" : ", ") + fmt(mean);
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    d = "slope " + fmt(slope) + " (mean errors " + curve + ")";
    return std::abs(slope + 0.5) <= 0.1;
  });

  criterion(9, "byte-identical outputs for identical config and seed, serial and parallel", [](std::string& d) {
    const std::vector<std::string> configs = {
        "run-drsp --d 3 --channel-diag 0.5,0.6,0.6244997998398398 --random-target 4 --shots 2000",
        "run-conventional --theta 0.5 --target 0.6,0:0.8 --shots 2000",
        "sweep-theta --steps 21 --shots 5000",
        "compare --theta 0.3 --random-target 8 --shots 5000",
        "trace --d 3 --channel-diag 0.5,0.6,0.6244997998398398 --random-target 4",
    };
    int compared = 0;
    for (const auto& base : configs) {
      for (const char* format : {"csv", "json"}) {
        std::string reference;
        for (int variant = 0; variant < 3; ++variant) {
          const fs::path out = work_dir() / ("det_" + std::to_string(compared) + "_" + std::to_string(variant));
          const std::string threads = variant == 2 ? " --threads 4" : "";
          const int code = run_tool(base + " --seed 99 --format " + format + threads + " --out " + out.string());
          if (code != 0) return d = "exit " + std::to_string(code) + " from: " + base, false;
          const std::string bytes = slurp(out);
          if (bytes.empty()) return d = "empty output from: " + base, false;
          if (variant == 0) {
            reference = bytes;
          } else if (bytes != reference) {
            return d = "outputs differ for: " + base + " --format " + format + threads, false;
          }
        }
        ++compared;
      }
    }
    d = std::to_string(compared) + " command/format pairs, 3 executions each (1 and 4 threads)";
    return true;
  });

  std::error_code ec;
  fs::remove_all(work_dir(), ec);
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
