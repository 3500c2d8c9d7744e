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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drsp/commands.hpp"

namespace {

int write_output(const drsp::cli::RunConfig& cfg, const std::string& text) {
  if (!cfg.out || *cfg.out == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return drsp::cli::kExitOk;
  }
  std::ofstream f(*cfg.out, std::ios::binary);
  if (!f) {
    std::cerr << "drsp: cannot write " << *cfg.out << "\n";
    return drsp::cli::kExitConfig;
  }
  f << text;
  return drsp::cli::kExitOk;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += ',';
    s += p;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using drsp::cli::RunConfig;
  CLI::App app{"Remote state preparation simulator"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  RunConfig cfg;
  std::string command;
  std::string format = "csv";
  double theta = 0.0;
  // Lists arrive split on commas from both the command line and the config
  // file reader; they are joined back before parsing.
  std::vector<std::string> channel_diag, target;
  std::string channel_matrix_file, out;
  std::uint64_t random_target = 0;
  std::size_t shots = 0;

  app.add_option("command", command, "run-drsp | run-conventional | sweep-theta | compare | trace")
      ->required()
      ->check(CLI::IsMember({"run-drsp", "run-conventional", "sweep-theta", "compare", "trace"}));
  app.add_option("--d", cfg.d, "local dimension")->capture_default_str();
  auto* theta_opt = app.add_option("--theta", theta, "d = 2 channel sin(theta)|00> + cos(theta)|11>");
  auto* diag_opt = app.add_option("--channel-diag", channel_diag, "diagonal channel coefficients, comma-separated")
                       ->delimiter(',');
  auto* file_opt = app.add_option("--channel-matrix-file", channel_matrix_file, "file with the d x d matrix lambda");
  auto* target_opt =
      app.add_option("--target", target, "target amplitudes: re, re:im or mag@phase, comma-separated")->delimiter(',');
  auto* random_opt = app.add_option("--random-target", random_target, "seed for a uniformly random target");
  auto* shots_opt = app.add_option("--shots", shots, "repetitions");
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  auto* out_opt = app.add_option("--out", out, "output path (stdout when omitted)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--steps", cfg.steps, "sweep-theta grid points")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads; output does not depend on it")->capture_default_str();
  app.add_option("--trace-cap", cfg.trace_cap, "largest d accepted by trace")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return drsp::cli::kExitConfig;
  }

  try {
    cfg.command = drsp::cli::parse_command(command);
    cfg.format = format == "json" ? drsp::cli::Format::kJson : drsp::cli::Format::kCsv;
    if (*theta_opt) cfg.theta = theta;
    if (*diag_opt) cfg.channel_diag = join(channel_diag);
    if (*file_opt) cfg.channel_matrix_file = channel_matrix_file;
    if (*target_opt) cfg.target = join(target);
    if (*random_opt) cfg.random_target = random_target;
    if (*shots_opt) cfg.shots = shots;
    if (*out_opt) cfg.out = out;
    const auto result = drsp::cli::dispatch(cfg);
    const int io = write_output(cfg, result.text);
    if (io != drsp::cli::kExitOk) return io;
    if (result.exit_code == drsp::cli::kExitInvariant) {
      std::cerr << "drsp: numerical invariant violated (DRSP fidelity below threshold)\n";
    }
    return result.exit_code;
  } catch (const drsp::cli::ConfigError& e) {
    std::cerr << "drsp: " << e.what() << "\n";
    return drsp::cli::kExitConfig;
  } catch (const drsp::InvariantViolation& e) {
    std::cerr << "drsp: invariant violation: " << e.what() << "\n";
    return drsp::cli::kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "drsp: " << e.what() << "\n";
    return drsp::cli::kExitConfig;
  }
}
