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

#ifndef COVERTQ__IO_HPP_
#define COVERTQ__IO_HPP_

// Serialization of channel specs and reports. Needs nlohmann/json on the
// include path as "json.hpp".

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "covertq/capacities.hpp"
#include "covertq/channels.hpp"
#include "covertq/covert_sim.hpp"
#include "covertq/eg_toy.hpp"
#include "covertq/error.hpp"

namespace covertq
{

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to the same double ("C" locale).
inline std::string format_double(double x)
{
  if (std::isnan(x)) {
    return "nan";
  }
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string & s)
{
  if (s == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (s == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ParseError, "not a number: '" + s + "'");
  }
  return v;
}

/// JSON number, or the string "inf" for an infinite value.
inline Json json_number(double x)
{
  if (std::isfinite(x)) {
    return x;
  }
  return format_double(x);
}

inline Json matrix_to_json(const Matrix & m)
{
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Rows of entries, each entry a real number or a [re, im] pair.
inline Matrix matrix_from_json(const Json & j, const std::string & what)
{
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw Error(ErrorKind::ParseError, what + ": expected a non-empty array of rows");
  }
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json & row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw Error(ErrorKind::ParseError, what + ": ragged matrix rows");
    }
    for (Index c = 0; c < cols; ++c) {
      const Json & e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(i, c) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw Error(ErrorKind::ParseError, what + ": entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

namespace detail
{

inline const Json & require_field(const Json & j, const char * key)
{
  if (!j.contains(key)) {
    throw Error(ErrorKind::ParseError, std::string("channel spec lacks field '") + key + "'");
  }
  return j.at(key);
}

}  // namespace detail

inline ChannelSpec channel_spec_from_json(const Json & j)
{
  if (!j.is_object()) {
    throw Error(ErrorKind::ParseError, "channel spec must be a JSON object");
  }
  const Json & kind = detail::require_field(j, "kind");
  if (!kind.is_string()) {
    throw Error(ErrorKind::ParseError, "channel spec 'kind' must be a string");
  }
  const auto k = kind.get<std::string>();
  if (k == "excitation") {
    const Json & g = detail::require_field(j, "gamma");
    if (!g.is_number()) {
      throw Error(ErrorKind::ParseError, "'gamma' must be a number");
    }
    return ExcitationSpec{g.get<double>()};
  }
  if (k == "kraus") {
    const Json & in = detail::require_field(j, "inDim");
    const Json & ops = detail::require_field(j, "kraus");
    if (!in.is_number_integer() || !ops.is_array() || ops.empty()) {
      throw Error(ErrorKind::ParseError, "'inDim' must be an integer and 'kraus' a non-empty array");
    }
    KrausSpec spec;
    spec.in_dim = in.get<Index>();
    for (std::size_t i = 0; i < ops.size(); ++i) {
      spec.kraus.push_back(matrix_from_json(ops[i], "kraus[" + std::to_string(i) + "]"));
      if (spec.kraus.back().cols() != spec.in_dim) {
        throw Error(ErrorKind::ParseError, "Kraus operator column count differs from inDim");
      }
    }
    return spec;
  }
  if (k == "cq-pair") {
    CqPairSpec spec;
    spec.sigma0 = matrix_from_json(detail::require_field(j, "sigma0"), "sigma0");
    spec.sigma1 = matrix_from_json(detail::require_field(j, "sigma1"), "sigma1");
    spec.omega0 = matrix_from_json(detail::require_field(j, "omega0"), "omega0");
    spec.omega1 = matrix_from_json(detail::require_field(j, "omega1"), "omega1");
    return spec;
  }
  throw Error(ErrorKind::ParseError, "unknown channel kind '" + k + "'");
}

inline Json channel_spec_to_json(const ChannelSpec & spec)
{
  Json j;
  if (const auto * e = std::get_if<ExcitationSpec>(&spec)) {
    j["kind"] = "excitation";
    j["gamma"] = e->gamma;
  } else if (const auto * k = std::get_if<KrausSpec>(&spec)) {
    j["kind"] = "kraus";
    j["inDim"] = k->in_dim;
    Json ops = Json::array();
    for (const auto & op : k->kraus) {
      ops.push_back(matrix_to_json(op));
    }
    j["kraus"] = std::move(ops);
  } else {
    const auto & cq = std::get<CqPairSpec>(spec);
    j["kind"] = "cq-pair";
    j["sigma0"] = matrix_to_json(cq.sigma0);
    j["sigma1"] = matrix_to_json(cq.sigma1);
    j["omega0"] = matrix_to_json(cq.omega0);
    j["omega1"] = matrix_to_json(cq.omega1);
  }
  return j;
}

inline Json parse_json_text(const std::string & text, const std::string & origin)
{
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorKind::ParseError, origin + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ChannelSpec load_channel_spec(const std::string & path)
{
  return channel_spec_from_json(parse_json_text(read_text_file(path), path));
}

/// Nats to the requested display unit.
struct Units
{
  bool bits = false;
  double operator()(double nats) const {return bits ? nats / std::numbers::ln2 : nats;}
  const char * name() const {return bits ? "bits" : "nats";}
};

inline Json to_json(const CapacityReport & r, Units u = {})
{
  Json j;
  j["units"] = u.name();
  j["dBob"] = json_number(u(r.d_bob));
  j["dWillie"] = json_number(u(r.d_willie));
  j["chi2Willie"] = json_number(r.chi2_willie);
  j["denom"] = json_number(r.denom);
  j["cSKey"] = json_number(u(r.c_s_key));
  j["cS"] = json_number(u(r.c_s));
  j["cEG"] = json_number(u(r.c_eg));
  j["lKeyMin"] = json_number(u(r.l_key_min));
  j["lKeyNoSecrecy"] = json_number(u(r.l_key_no_secrecy));
  j["antiDegradedFlag"] = r.anti_degraded;
  return j;
}

inline Json to_json(const SimConfig & c)
{
  Json j;
  j["n"] = c.n;
  j["gamma"] = c.gamma;
  j["alpha"] = c.alpha();
  j["mSize"] = c.m_size;
  j["lSize"] = c.l_size;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["sGrid"] = c.s_grid;
  j["betaGrid"] = c.beta_grid;
  if (c.a_threshold) {
    j["aThreshold"] = *c.a_threshold;
  } else {
    j["aThreshold"] = nullptr;
  }
  j["maxDenseDim"] = c.max_dense_dim;
  j["mcSamples"] = c.mc_samples;
  j["maxDecoderCodewords"] = c.max_decoder_codewords;
  j["path"] = c.path == ComputePath::Commuting ? "commuting" : "dense";
  return j;
}

inline Json to_json(const CovertnessReport & r, Units u = {})
{
  Json j;
  j["dCovert"] = json_number(u(r.d_covert));
  j["dReference"] = json_number(u(r.d_reference));
  j["traceDistToMixed"] = json_number(r.trace_dist_to_mixed);
  j["helstromError"] = json_number(r.helstrom_error);
  j["pinskerLowerBound"] = json_number(r.pinsker_lower_bound);
  j["resolvabilityRhs"] = json_number(r.resolvability_rhs);
  j["method"] = r.method;
  if (r.method == "commuting-monte-carlo") {
    j["dCovertStdErr"] = json_number(u(r.d_covert_std_err));
    j["traceDistStdErr"] = json_number(r.trace_dist_std_err);
    j["helstromStdErr"] = json_number(r.helstrom_std_err);
  }
  return j;
}

inline Json to_json(const SecrecyReport & r)
{
  Json j;
  j["perBinDistances"] = r.per_bin_distances;
  j["averageLeakage"] = json_number(r.average_leakage);
  return j;
}

inline Json to_json(const DecoderReport & r)
{
  Json j;
  j["perMessageError"] = r.per_message_error;
  j["averageError"] = json_number(r.average_error);
  j["maxError"] = json_number(r.max_error);
  j["aThreshold"] = json_number(r.a_threshold);
  return j;
}

inline Json to_json(const ResolvabilityResult & r)
{
  Json j;
  j["empiricalMeanDistance"] = json_number(r.empirical_mean_distance);
  j["standardError"] = json_number(r.std_error);
  j["rhs"] = json_number(r.rhs);
  j["holds"] = r.holds;
  j["samples"] = r.samples;
  j["codebookSize"] = r.codebook_size;
  j["bestS"] = json_number(r.bound.s);
  j["bestBeta"] = json_number(r.bound.beta);
  j["nu"] = r.bound.nu;
  return j;
}

inline Json to_json(const SimulationReport & r, Units u = {})
{
  Json j;
  j["units"] = u.name();
  j["config"] = to_json(r.config);
  j["covertness"] = to_json(r.covertness, u);
  j["secrecy"] = r.secrecy ? to_json(*r.secrecy) : Json(nullptr);
  j["decoder"] = r.decoder ? to_json(*r.decoder) : Json(nullptr);
  j["resolvability"] = r.resolvability ? to_json(*r.resolvability) : Json(nullptr);
  j["notes"] = r.notes;
  return j;
}

inline Json to_json(const EGConfig & c)
{
  Json j;
  j["n"] = c.n;
  j["T"] = c.t_dim;
  j["lSize"] = c.l_size;
  j["gamma"] = c.gamma;
  j["alpha"] = c.alpha();
  j["seed"] = c.seed;
  j["decoder"] = c.decoder == EGDecoder::Auto ? "auto" :
    (c.decoder == EGDecoder::Threshold ? "threshold" : "pretty-good");
  j["target"] = c.target == DecouplingTarget::Ideal ? "ideal" : "self";
  if (c.a_threshold) {
    j["aThreshold"] = *c.a_threshold;
  } else {
    j["aThreshold"] = nullptr;
  }
  j["maxDim"] = c.max_dim;
  return j;
}

inline Json to_json(const EGReport & r, const EGConfig & c, Units u = {})
{
  Json j;
  j["units"] = u.name();
  j["config"] = to_json(c);
  j["fidelity"] = json_number(r.fidelity);
  j["meanFidelity"] = json_number(r.mean_fidelity);
  j["perJFidelity"] = r.per_j_fidelity;
  j["covertDivergence"] = json_number(u(r.covert_divergence));
  j["traceDistanceGHZ"] = json_number(r.trace_distance_ghz);
  j["bestJ"] = r.best_j;
  Json diag;
  for (const auto & [name, value] : r.diagnostics) {
    diag[name] = json_number(value);
  }
  j["perStepDiagnostics"] = std::move(diag);
  return j;
}

/// Pretty JSON text with a trailing newline.
inline std::string dump_json(const Json & j)
{
  return j.dump(2) + "\n";
}

struct SweepRow
{
  double gamma = 0.0;
  double d_bob = 0.0;
  double d_willie = 0.0;
  double chi2 = 0.0;
  double c_s_key = 0.0;
  double c_s = 0.0;
  double c_eg = 0.0;
  double l_key_min = 0.0;
  double c_eg_closed_form = 0.0;
};

inline const char * sweep_csv_header()
{
  return "gamma,d_bob,d_willie,chi2,c_s_key,c_s,c_eg,l_key_min,c_eg_closed_form";
}

/// Excitation channel over an inclusive linear grid of `steps` values.
inline std::vector<SweepRow> excitation_sweep(double from, double to, int steps, const Tolerances & tol = {})
{
  if (!(from > 0.0 && from < to && to < 1.0) || steps < 2) {
    throw Error(ErrorKind::InvalidParameter, "sweep needs 0 < from < to < 1 and steps >= 2");
  }
  std::vector<SweepRow> rows;
  for (int i = 0; i < steps; ++i) {
    const double g = i == steps - 1 ? to : from + (to - from) * i / (steps - 1);
    const auto iso = stinespring_from_kraus(excitation_channel(g), tol);
    const auto rep = capacity_report(iso, tol);
    rows.push_back(
      {g, rep.d_bob, rep.d_willie, rep.chi2_willie, rep.c_s_key, rep.c_s, rep.c_eg, rep.l_key_min,
        excitation_capacity_closed_form(g)});
  }
  return rows;
}

/// CSV with LF line endings; rates converted per `u`, gamma and chi2 left as is.
inline std::string sweep_to_csv(const std::vector<SweepRow> & rows, Units u = {})
{
  std::string out = sweep_csv_header();
  out += '\n';
  for (const auto & r : rows) {
    const double fields[] = {
      r.gamma, u(r.d_bob), u(r.d_willie), r.chi2, u(r.c_s_key), u(r.c_s), u(r.c_eg), u(r.l_key_min),
      u(r.c_eg_closed_form)};
    bool first = true;
    for (double f : fields) {
      if (!first) {
        out += ',';
      }
      out += format_double(f);
      first = false;
    }
    out += '\n';
  }
  return out;
}

inline std::vector<SweepRow> sweep_from_csv(const std::string & text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != sweep_csv_header()) {
    throw Error(ErrorKind::ParseError, "unexpected sweep CSV header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<double> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      f.push_back(parse_double(cell));
    }
    if (f.size() != 9) {
      throw Error(ErrorKind::ParseError, "sweep CSV row needs 9 fields");
    }
    rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8]});
  }
  return rows;
}

}  // namespace covertq

#endif  // COVERTQ__IO_HPP_
