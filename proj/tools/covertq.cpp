// Copyright 2026 The covertq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// covertq command-line tool: capacity reports, excitation sweeps, covert
// code simulations and the entanglement-generation demo.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "covertq/covertq.hpp"
#include "covertq/io.hpp"

#ifndef COVERTQ_VERSION
#define COVERTQ_VERSION "unknown"
#endif

namespace
{

using covertq::Error;
using covertq::ErrorKind;
using covertq::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;
constexpr int kExitAssumption = 4;

int exit_code_for(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::BudgetExceeded:
      return kExitBudget;
    case ErrorKind::AssumptionViolation:
    case ErrorKind::TrivialTest:
      return kExitAssumption;
    default:
      return kExitInput;
  }
}

std::string utc_timestamp()
{
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
  }
  out << text;
}

// Writes the payload to --out (plus a manifest) or to stdout.
void emit(
  const std::string & text, const std::optional<std::string> & out_path, const std::string & command,
  const std::vector<std::string> & argv, const Json & channel, const Json & params,
  std::optional<std::uint64_t> seed)
{
  if (!out_path) {
    std::cout << text;
    return;
  }
  write_file(*out_path, text);
  Json m;
  m["command"] = command;
  m["argv"] = argv;
  m["channelSpec"] = channel;
  m["parameters"] = params;
  if (seed) {
    m["seed"] = *seed;
  } else {
    m["seed"] = nullptr;
  }
  m["timestamp"] = utc_timestamp();
  m["toolkitVersion"] = COVERTQ_VERSION;
  m["outputPath"] = *out_path;
  write_file(*out_path + ".manifest.json", covertq::dump_json(m));
}

std::optional<std::size_t> budget_override()
{
  const char * env = std::getenv("COVERTQ_MAX_DENSE_DIM");
  if (env == nullptr || *env == '\0') {
    return std::nullopt;
  }
  char * end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) {
    throw Error(ErrorKind::InvalidParameter, "COVERTQ_MAX_DENSE_DIM must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

covertq::ChannelSpec channel_or_default(const std::string & path, double default_gamma)
{
  if (path.empty()) {
    return covertq::ExcitationSpec{default_gamma};
  }
  return covertq::load_channel_spec(path);
}

}  // namespace

int main(int argc, char ** argv)
{
  const std::vector<std::string> args(argv, argv + argc);

  CLI::App app{"Covert quantum communication toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", COVERTQ_VERSION);
  bool bits = false;
  std::string out_path;
  app.add_flag("--bits", bits, "Display rates and divergences in bits instead of nats");
  app.add_option("--out", out_path, "Write the result to this file and a manifest next to it");

  std::string spec_path;
  auto * capacity = app.add_subcommand("capacity", "Capacity and key-rate report for a channel spec");
  capacity->add_option("spec", spec_path, "Channel spec JSON")->required();

  double g_from = 0.05;
  double g_to = 0.95;
  int steps = 19;
  auto * sweep = app.add_subcommand("sweep", "Excitation-channel capacities over a gamma grid (CSV)");
  sweep->add_option("--from", g_from, "First gamma")->capture_default_str();
  sweep->add_option("--to", g_to, "Last gamma")->capture_default_str();
  sweep->add_option("--steps", steps, "Number of grid points, endpoints included")->capture_default_str();

  covertq::SimConfig sim;
  std::string sim_channel;
  double sim_a = 0.0;
  bool fast_path = false;
  auto * simulate = app.add_subcommand("simulate", "Random covert code: covertness, secrecy, decoder");
  simulate->add_option("--channel", sim_channel, "Channel spec JSON (default: excitation gamma=0.25)");
  simulate->add_option("--n", sim.n, "Blocklength")->capture_default_str();
  simulate->add_option("--gamma", sim.gamma, "alpha = gamma / sqrt(n)")->capture_default_str();
  simulate->add_option("--m", sim.m_size, "Number of bins |M|")->capture_default_str();
  simulate->add_option("--l", sim.l_size, "Words per bin |L|")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Generator seed")->capture_default_str();
  simulate->add_option("--samples", sim.samples, "Codebooks in the resolvability experiment")->capture_default_str();
  auto * a_opt = simulate->add_option("--a-threshold", sim_a, "Decoder threshold a (default alpha n D(sigma1||sigma0) / 2)");
  simulate->add_option("--mc-samples", sim.mc_samples, "Monte Carlo draws beyond the exact budget")->capture_default_str();
  simulate->add_option("--max-decoder-codewords", sim.max_decoder_codewords, "Skip the decoder above this codebook size")
  ->capture_default_str();
  simulate->add_flag("--commuting-fast-path", fast_path, "Use the shared eigenbasis of omega0 and omega1");

  covertq::EGConfig eg;
  std::string eg_channel;
  std::string eg_decoder = "auto";
  std::string eg_target = "ideal";
  double eg_a = 0.0;
  auto * egdemo = app.add_subcommand("egdemo", "Toy-scale entanglement-generation protocol");
  egdemo->add_option("--channel", eg_channel, "Channel spec JSON (default: excitation gamma=0.1)");
  egdemo->add_option("--n", eg.n, "Blocklength")->capture_default_str();
  egdemo->add_option("--T", eg.t_dim, "Message dimension")->capture_default_str();
  egdemo->add_option("--l", eg.l_size, "Words per message |L|")->capture_default_str();
  egdemo->add_option("--gamma", eg.gamma, "alpha = gamma / sqrt(n)")->capture_default_str();
  egdemo->add_option("--seed", eg.seed, "Generator seed")->capture_default_str();
  egdemo->add_option("--decoder", eg_decoder, "auto, threshold or pretty-good")
  ->check(CLI::IsMember({"auto", "threshold", "pretty-good"}))->capture_default_str();
  egdemo->add_option("--target", eg_target, "Decoupling target: ideal or self")
  ->check(CLI::IsMember({"ideal", "self"}))->capture_default_str();
  auto * eg_a_opt = egdemo->add_option("--a-threshold", eg_a, "Threshold for the threshold decoder");

  auto * validate = app.add_subcommand("validate", "Check a channel spec and its covert assumptions");
  validate->add_option("spec", spec_path, "Channel spec JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  const std::optional<std::string> out = out_path.empty() ? std::nullopt : std::optional(out_path);
  const covertq::Units units{bits};

  try {
    const auto budget = budget_override();
    if (*capacity) {
      const auto spec = covertq::load_channel_spec(spec_path);
      const auto report = covertq::capacity_report(covertq::covert_channel_from_spec(spec));
      emit(
        covertq::dump_json(covertq::to_json(report, units)), out, "capacity", args,
        covertq::channel_spec_to_json(spec), Json::object(), std::nullopt);
    } else if (*sweep) {
      const auto rows = covertq::excitation_sweep(g_from, g_to, steps);
      Json params{{"from", g_from}, {"to", g_to}, {"steps", steps}, {"units", units.name()}};
      emit(
        covertq::sweep_to_csv(rows, units), out, "sweep", args, Json{{"kind", "excitation"}}, params,
        std::nullopt);
    } else if (*simulate) {
      const auto spec = channel_or_default(sim_channel, 0.25);
      if (*a_opt) {
        sim.a_threshold = sim_a;
      }
      if (budget) {
        sim.max_dense_dim = *budget;
      }
      sim.path = fast_path ? covertq::ComputePath::Commuting : covertq::ComputePath::Dense;
      const auto ch = covertq::covert_channel_from_spec(spec);
      const auto report = covertq::run_simulation(ch, sim);
      emit(
        covertq::dump_json(covertq::to_json(report, units)), out, "simulate", args,
        covertq::channel_spec_to_json(spec), covertq::to_json(sim), sim.seed);
    } else if (*egdemo) {
      const auto spec = channel_or_default(eg_channel, 0.1);
      eg.decoder = eg_decoder == "threshold" ? covertq::EGDecoder::Threshold :
        (eg_decoder == "pretty-good" ? covertq::EGDecoder::PrettyGood : covertq::EGDecoder::Auto);
      eg.target = eg_target == "self" ? covertq::DecouplingTarget::Self : covertq::DecouplingTarget::Ideal;
      if (*eg_a_opt) {
        eg.a_threshold = eg_a;
      }
      if (budget) {
        eg.max_dim = *budget;
      }
      const auto iso = covertq::isometry_from_spec(spec);
      const auto report = covertq::eg_report(iso, eg);
      emit(
        covertq::dump_json(covertq::to_json(report, eg, units)), out, "egdemo", args,
        covertq::channel_spec_to_json(spec), covertq::to_json(eg), eg.seed);
    } else if (*validate) {
      const auto spec = covertq::load_channel_spec(spec_path);
      Json j;
      j["valid"] = true;
      j["kind"] = covertq::channel_spec_to_json(spec)["kind"];
      if (covertq::has_isometry(spec)) {
        const auto iso = covertq::isometry_from_spec(spec);
        j["inDim"] = iso.in_dim();
        j["outDimB"] = iso.out_dim_b();
        j["outDimW"] = iso.out_dim_w();
      }
      const auto ch = covertq::covert_channel_from_spec(spec);
      j["dimB"] = ch.sigma0().dim();
      j["dimW"] = ch.omega0().dim();
      j["covertAssumptions"] = "satisfied";
      emit(covertq::dump_json(j), out, "validate", args, covertq::channel_spec_to_json(spec), Json::object(), std::nullopt);
    }
  } catch (const Error & e) {
    std::cerr << "covertq: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception & e) {
    std::cerr << "covertq: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
