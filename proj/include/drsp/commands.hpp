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

// Command implementations behind the drsp executable. Each command renders
// its whole output to a string so identical configs give identical bytes.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "drsp/core.hpp"
#include "drsp/format.hpp"
#include "drsp/protocols.hpp"
#include "drsp/rng.hpp"

namespace drsp::cli {

/// Bad user input; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;

enum class Command { kRunDrsp, kRunConventional, kSweepTheta, kCompare, kTrace };
enum class Format { kCsv, kJson };

inline Command parse_command(std::string_view s) {
  if (s == "run-drsp") return Command::kRunDrsp;
  if (s == "run-conventional") return Command::kRunConventional;
  if (s == "sweep-theta") return Command::kSweepTheta;
  if (s == "compare") return Command::kCompare;
  if (s == "trace") return Command::kTrace;
  throw ConfigError("unknown command: " + std::string(s));
}

struct RunConfig {
  Command command = Command::kRunDrsp;
  int d = 2;
  std::optional<double> theta;
  std::optional<std::string> channel_diag;
  std::optional<std::string> channel_matrix_file;
  std::optional<std::string> target;
  std::optional<std::uint64_t> random_target;
  std::optional<std::size_t> shots;
  std::uint64_t seed = 1;
  std::optional<std::string> out;
  Format format = Format::kCsv;
  int steps = 101;
  unsigned threads = 1;
  int trace_cap = 8;

  std::size_t shots_or_default() const {
    if (shots) return *shots;
    return command == Command::kSweepTheta || command == Command::kCompare ? 10000 : 1;
  }
};

namespace detail {

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    throw ConfigError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// "re", "re:im" or polar "mag@phase" (phase in radians).
inline Complex parse_complex(std::string_view text) {
  const std::string s = detail::trim(text);
  if (s.empty()) throw ConfigError("empty amplitude");
  if (const auto at = s.find('@'); at != std::string::npos) {
    return std::polar(detail::parse_double(std::string_view(s).substr(0, at)),
                      detail::parse_double(std::string_view(s).substr(at + 1)));
  }
  if (const auto colon = s.find(':'); colon != std::string::npos) {
    return {detail::parse_double(std::string_view(s).substr(0, colon)),
            detail::parse_double(std::string_view(s).substr(colon + 1))};
  }
  return {detail::parse_double(s), 0.0};
}

/// Comma-separated list of parse_complex() entries.
inline ComplexVector parse_complex_list(std::string_view text) {
  std::vector<Complex> items;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    items.push_back(parse_complex(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                     : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  ComplexVector v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) v[static_cast<Eigen::Index>(i)] = items[i];
  return v;
}

/// d rows of d whitespace-separated entries; '#' starts a comment.
inline ComplexMatrix parse_channel_matrix(std::string_view text) {
  std::vector<std::vector<Complex>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream fields(line);
    std::vector<Complex> row;
    std::string tok;
    while (fields >> tok) row.push_back(parse_complex(tok));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const auto d = static_cast<Eigen::Index>(rows.size());
  if (d == 0) throw ConfigError("channel matrix file is empty");
  ComplexMatrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != d) {
      throw ConfigError("channel matrix must be square");
    }
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

/// Checks cross-field consistency that the flag parser cannot express.
inline void validate(const RunConfig& cfg) {
  const int forms = (cfg.theta ? 1 : 0) + (cfg.channel_diag ? 1 : 0) + (cfg.channel_matrix_file ? 1 : 0);
  if (cfg.command == Command::kSweepTheta) {
    if (forms != 0) throw ConfigError("sweep-theta builds its own channels; drop the channel flags");
    if (cfg.d != 2) throw ConfigError("sweep-theta is defined for d = 2");
    if (cfg.steps < 2) throw ConfigError("sweep-theta needs at least 2 grid points");
  } else if (forms != 1) {
    throw ConfigError("give exactly one of --theta, --channel-diag, --channel-matrix-file");
  }
  if (cfg.theta && !(*cfg.theta >= 0.0 && *cfg.theta <= std::numbers::pi / 4)) {
    throw ConfigError("theta must lie in [0, pi/4]");
  }
  if (cfg.theta && cfg.d != 2) throw ConfigError("--theta describes a d = 2 channel");
  if (cfg.d < 2 || cfg.d > tol::kMaxDimension) throw ConfigError("d out of range");
  if (cfg.target && cfg.random_target) throw ConfigError("give at most one of --target, --random-target");
  if ((cfg.command == Command::kRunConventional || cfg.command == Command::kCompare) && cfg.d != 2) {
    throw ConfigError("the conventional protocol is defined for d = 2");
  }
  if (cfg.shots && *cfg.shots == 0) throw ConfigError("shots must be at least 1");
  if (cfg.command == Command::kTrace && cfg.d > cfg.trace_cap) {
    throw ConfigError("trace dump capped at d = " + std::to_string(cfg.trace_cap));
  }
}

inline ChannelState build_channel(const RunConfig& cfg) {
  try {
    if (cfg.theta) return ChannelState::from_theta(*cfg.theta);
    if (cfg.channel_diag) {
      const ComplexVector c = parse_complex_list(*cfg.channel_diag);
      if (c.size() != cfg.d) throw ConfigError("--channel-diag needs d entries");
      return ChannelState::diagonal(c);
    }
    std::ifstream f(*cfg.channel_matrix_file);
    if (!f) throw ConfigError("cannot read " + *cfg.channel_matrix_file);
    std::stringstream buf;
    buf << f.rdbuf();
    const ComplexMatrix m = parse_channel_matrix(buf.str());
    if (m.rows() != cfg.d) throw ConfigError("channel matrix dimension differs from --d");
    return ChannelState(m);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Explicit amplitudes, a seeded uniform draw from the unit sphere, or the
/// uniform superposition when neither is given.
inline TargetState build_target(const RunConfig& cfg) {
  try {
    if (cfg.target) {
      const ComplexVector x = parse_complex_list(*cfg.target);
      if (x.size() != cfg.d) throw ConfigError("--target needs d amplitudes");
      return TargetState(x);
    }
    if (cfg.random_target) return TargetState(rng::random_unit_vector(cfg.d, *cfg.random_target));
    return TargetState(ComplexVector::Constant(cfg.d, 1.0 / std::sqrt(static_cast<double>(cfg.d))));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

struct CommandOutput {
  std::string text;
  int exit_code = kExitOk;
};

namespace detail {

inline nlohmann::json num(double v) { return round_to_printed(v); }

inline std::string basis_label(const PureState& s, std::size_t flat) {
  const bool compact = std::all_of(s.dims().begin(), s.dims().end(), [](int d) { return d <= 10; });
  std::string out;
  for (int k = 0; k < s.num_subsystems(); ++k) {
    if (!compact && k) out += ',';
    out += std::to_string(s.digit(flat, k));
  }
  return out;
}

inline std::string format_complex(Complex z) {
  if (z.imag() == 0.0) return format_number(z.real());
  if (z.real() == 0.0) return format_number(z.imag()) + "i";
  return "(" + format_number(z.real()) + (z.imag() < 0 ? "-" : "+") + format_number(std::abs(z.imag())) + "i)";
}

inline constexpr double kPrintFloor = 1e-12;

inline std::string ket_line(const PureState& s) {
  std::string out;
  for (std::size_t flat = 0; flat < s.size(); ++flat) {
    const Complex a = s.amplitude(flat);
    if (std::abs(a) <= kPrintFloor) continue;
    std::string term = format_complex(a);
    if (!out.empty()) {
      // Fold a leading minus into the separator.
      if (term[0] == '-') {
        out += " - ";
        term.erase(0, 1);
      } else {
        out += " + ";
      }
    }
    out += term + "|" + basis_label(s, flat) + ">";
  }
  return out;
}

/// Runs fn(i) for i in [0, n) across `threads` workers, results in index order.
template <typename Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> slots(n);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned t) {
    try {
      for (std::size_t i = t; i < n; i += threads) slots[i].emplace(fn(i));
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct BatchStats {
  std::size_t shots = 0;
  std::size_t successes = 0;
  double fidelity_sum = 0.0;
  double min_fidelity = 1.0;
  std::vector<BranchSample> samples;

  double success_rate() const { return static_cast<double>(successes) / static_cast<double>(shots); }
  double mean_fidelity() const { return fidelity_sum / static_cast<double>(shots); }
};

/// Shot i uses seed derive(seed, i).
inline BatchStats run_batch(const BranchTable& table, std::size_t shots, std::uint64_t seed, bool keep_samples) {
  BatchStats stats;
  stats.shots = shots;
  if (keep_samples) stats.samples.reserve(shots);
  for (std::size_t i = 0; i < shots; ++i) {
    const BranchSample s = table.sample(rng::derive(seed, i));
    stats.successes += s.succeeded ? 1 : 0;
    stats.fidelity_sum += s.fidelity;
    stats.min_fidelity = std::min(stats.min_fidelity, s.fidelity);
    if (keep_samples) stats.samples.push_back(s);
  }
  return stats;
}

inline nlohmann::json density_json(const DensityMatrix& rho) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < rho.dim(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < rho.dim(); ++c) row.push_back({num(rho(r, c).real()), num(rho(r, c).imag())});
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json transcript_json(const OwnershipLedger& ledger) {
  nlohmann::json lines = nlohmann::json::array();
  std::istringstream in(ledger.to_tsv());
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline int alarm_code(double min_drsp_fidelity) {
  return min_drsp_fidelity < 1.0 - tol::kFidelityAlarm ? kExitInvariant : kExitOk;
}

inline CommandOutput run_protocol(const RunConfig& cfg, ProtocolKind kind) {
  const ChannelState channel = build_channel(cfg);
  const TargetState target = build_target(cfg);
  const std::size_t shots = cfg.shots_or_default();
  ProtocolResult first = [&] {
    if (kind == ProtocolKind::kDrsp) return run_optimal_drsp(channel, target, rng::derive(cfg.seed, 0));
    return run_conventional_rsp(channel, target, rng::derive(cfg.seed, 0));
  }();
  const BranchTable table = kind == ProtocolKind::kDrsp
                                ? BranchTable::for_drsp(prepare_optimal_drsp(channel, target))
                                : BranchTable::for_conventional(prepare_conventional_rsp(channel, target));
  const BatchStats stats = run_batch(table, shots, cfg.seed, cfg.format == Format::kCsv);
  const char* name = kind == ProtocolKind::kDrsp ? "drsp" : "conventional";

  CommandOutput out;
  if (kind == ProtocolKind::kDrsp) out.exit_code = alarm_code(stats.min_fidelity);
  if (cfg.format == Format::kJson) {
    nlohmann::json outcomes = nlohmann::json::object();
    for (const auto& [k, v] : first.outcomes) outcomes[k] = v;
    nlohmann::json j = {
        {"protocol", name},
        {"d", channel.dim()},
        {"shots", shots},
        {"seed", cfg.seed},
        {"success_rate", num(stats.success_rate())},
        {"mean_fidelity", num(stats.mean_fidelity())},
        {"min_fidelity", num(stats.min_fidelity)},
        {"first_run",
         {{"succeeded", first.succeeded},
          {"outcomes", outcomes},
          {"fidelity", num(first.fidelity_to_target)},
          {"bob_state", density_json(first.bob_state)},
          {"transcript", transcript_json(first.ledger)}}},
    };
    out.text = j.dump(2) + "\n";
    return out;
  }
  out.text = "run,outcome_filter,outcome_C,outcome_A,succeeded,fidelity\n";
  auto cell = [](int v) { return v < 0 ? std::string() : std::to_string(v); };
  for (std::size_t i = 0; i < stats.samples.size(); ++i) {
    const BranchSample& s = stats.samples[i];
    out.text += std::to_string(i) + ',' + cell(s.filter_outcome) + ',' + cell(s.c_outcome) + ',' +
                cell(s.a_outcome) + ',' + (s.succeeded ? "1" : "0") + ',' + format_number(s.fidelity) + '\n';
  }
  return out;
}

}  // namespace detail

inline CommandOutput cmd_run_drsp(const RunConfig& cfg) { return detail::run_protocol(cfg, ProtocolKind::kDrsp); }

inline CommandOutput cmd_run_conventional(const RunConfig& cfg) {
  return detail::run_protocol(cfg, ProtocolKind::kConventional);
}

struct SweepRow {
  double theta;
  double p_conventional_theory;
  double p_conventional_empirical;
  double p_drsp_theory;
  double drsp_fidelity_mean;
  double drsp_fidelity_min;
};

/// One row per grid point theta_p = (pi/4) p / (steps - 1). Point p draws its
/// shots from the key derive(seed, p).
inline std::vector<SweepRow> sweep_theta_rows(const RunConfig& cfg) {
  const TargetState target = build_target(cfg);
  const std::size_t shots = cfg.shots_or_default();
  const auto n = static_cast<std::size_t>(cfg.steps);
  return detail::parallel_map(n, cfg.threads, [&](std::size_t p) {
    const double theta = std::numbers::pi / 4 * static_cast<double>(p) / static_cast<double>(n - 1);
    const ChannelState channel = ChannelState::from_theta(theta);
    const std::uint64_t point_seed = rng::derive(cfg.seed, p);
    const auto conv = detail::run_batch(BranchTable::for_conventional(prepare_conventional_rsp(channel, target)),
                                        shots, point_seed, false);
    const auto drsp =
        detail::run_batch(BranchTable::for_drsp(prepare_optimal_drsp(channel, target)), shots, point_seed, false);
    const double s = std::sin(theta);
    return SweepRow{theta, 2.0 * s * s, conv.success_rate(), 1.0, drsp.mean_fidelity(), drsp.min_fidelity};
  });
}

inline CommandOutput cmd_sweep_theta(const RunConfig& cfg) {
  const auto rows = sweep_theta_rows(cfg);
  CommandOutput out;
  double worst = 1.0;
  for (const auto& r : rows) worst = std::min(worst, r.drsp_fidelity_min);
  out.exit_code = detail::alarm_code(worst);
  if (cfg.format == Format::kJson) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      arr.push_back({{"theta", detail::num(r.theta)},
                     {"p_conventional_theory", detail::num(r.p_conventional_theory)},
                     {"p_conventional_empirical", detail::num(r.p_conventional_empirical)},
                     {"p_drsp_theory", detail::num(r.p_drsp_theory)},
                     {"drsp_fidelity_mean", detail::num(r.drsp_fidelity_mean)}});
    }
    out.text = arr.dump(2) + "\n";
    return out;
  }
  out.text = "theta,p_conventional_theory,p_conventional_empirical,p_drsp_theory,drsp_fidelity_mean\n";
  for (const auto& r : rows) {
    out.text += format_number(r.theta) + ',' + format_number(r.p_conventional_theory) + ',' +
                format_number(r.p_conventional_empirical) + ',' + format_number(r.p_drsp_theory) + ',' +
                format_number(r.drsp_fidelity_mean) + '\n';
  }
  return out;
}

struct CompareRow {
  std::string protocol;
  double success_rate;
  double mean_fidelity;
  std::size_t shots;
  std::uint64_t seed;
};

/// Both protocols on the same channel, target and per-shot seeds. The
/// conventional mean fidelity counts failed runs with their diagnostic
/// fidelity.
inline std::vector<CompareRow> compare_rows(const RunConfig& cfg) {
  const ChannelState channel = build_channel(cfg);
  const TargetState target = build_target(cfg);
  const std::size_t shots = cfg.shots_or_default();
  const auto stats = detail::parallel_map(2, cfg.threads, [&](std::size_t which) {
    const BranchTable table = which == 0 ? BranchTable::for_conventional(prepare_conventional_rsp(channel, target))
                                         : BranchTable::for_drsp(prepare_optimal_drsp(channel, target));
    return detail::run_batch(table, shots, cfg.seed, false);
  });
  return {{"conventional", stats[0].success_rate(), stats[0].mean_fidelity(), shots, cfg.seed},
          {"drsp", stats[1].success_rate(), stats[1].mean_fidelity(), shots, cfg.seed}};
}

inline CommandOutput cmd_compare(const RunConfig& cfg) {
  const auto rows = compare_rows(cfg);
  CommandOutput out;
  if (cfg.format == Format::kJson) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      arr.push_back({{"protocol", r.protocol},
                     {"success_rate", detail::num(r.success_rate)},
                     {"mean_fidelity", detail::num(r.mean_fidelity)},
                     {"shots", r.shots},
                     {"seed", r.seed}});
    }
    out.text = arr.dump(2) + "\n";
  } else {
    out.text = "protocol,success_rate,mean_fidelity,shots,seed\n";
    for (const auto& r : rows) {
      out.text += r.protocol + ',' + format_number(r.success_rate) + ',' + format_number(r.mean_fidelity) + ',' +
                  std::to_string(r.shots) + ',' + std::to_string(r.seed) + '\n';
    }
  }
  if (rows[1].success_rate < 1.0) out.exit_code = kExitInvariant;
  return out;
}

/// phi_0 ... phi_4 of one DRSP run plus its transcript.
inline CommandOutput cmd_trace(const RunConfig& cfg) {
  const ChannelState channel = build_channel(cfg);
  const TargetState target = build_target(cfg);
  const ProtocolResult result = run_optimal_drsp(channel, target, cfg.seed);
  CommandOutput out;
  out.exit_code = detail::alarm_code(result.fidelity_to_target);
  if (cfg.format == Format::kJson) {
    nlohmann::json states = nlohmann::json::array();
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
      const PureState& s = result.trace[k];
      nlohmann::json amps = nlohmann::json::array();
      for (std::size_t flat = 0; flat < s.size(); ++flat) {
        const Complex a = s.amplitude(flat);
        if (std::abs(a) <= detail::kPrintFloor) continue;
        amps.push_back({{"basis", detail::basis_label(s, flat)},
                        {"re", detail::num(a.real())},
                        {"im", detail::num(a.imag())}});
      }
      states.push_back({{"label", "phi" + std::to_string(k)},
                        {"factorized", verify_factorization(s, kB)},
                        {"amplitudes", amps}});
    }
    nlohmann::json outcomes = nlohmann::json::object();
    for (const auto& [k, v] : result.outcomes) outcomes[k] = v;
    nlohmann::json j = {{"d", channel.dim()},
                        {"seed", cfg.seed},
                        {"states", states},
                        {"outcomes", outcomes},
                        {"fidelity", detail::num(result.fidelity_to_target)},
                        {"transcript", detail::transcript_json(result.ledger)}};
    out.text = j.dump(2) + "\n";
    return out;
  }
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    out.text += "phi" + std::to_string(k) + " = " + detail::ket_line(result.trace[k]) + '\n';
  }
  out.text += "fidelity = " + format_number(result.fidelity_to_target) + '\n';
  out.text += "transcript:\n" + result.ledger.to_tsv();
  return out;
}

inline CommandOutput dispatch(const RunConfig& cfg) {
  validate(cfg);
  switch (cfg.command) {
    case Command::kRunDrsp: return cmd_run_drsp(cfg);
    case Command::kRunConventional: return cmd_run_conventional(cfg);
    case Command::kSweepTheta: return cmd_sweep_theta(cfg);
    case Command::kCompare: return cmd_compare(cfg);
    case Command::kTrace: return cmd_trace(cfg);
  }
  throw ConfigError("unknown command");
}

}  // namespace drsp::cli
