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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "covertq/eg_toy.hpp"
#include "test_support.hpp"

namespace
{

using namespace covertq;
namespace ts = testing_support;

StinespringIsometry excitation_iso(double g)
{
  return stinespring_from_kraus(excitation_channel(g));
}

StinespringIsometry noiseless_iso()
{
  return stinespring_from_kraus(KrausChannel({Matrix::Identity(2, 2)}));
}

EGToyCode generic_code()
{
  EGConfig cfg;
  cfg.n = 4;
  cfg.t_dim = 2;
  cfg.l_size = 2;
  return sample_eg_code(cfg);
}

TEST(EGToy, SampledCodeIsDistinctAndDeterministic)
{
  EGConfig cfg;
  cfg.n = 5;
  cfg.t_dim = 3;
  cfg.l_size = 3;
  cfg.gamma = 0.8;
  const auto a = sample_eg_code(cfg);
  const auto b = sample_eg_code(cfg);
  EXPECT_EQ(a.words, b.words);
  EXPECT_EQ(std::set<Word>(a.words.begin(), a.words.end()).size(), a.words.size());
  EXPECT_NEAR(a.alpha, 0.8 / std::sqrt(5.0), 1e-15);
  cfg.n = 2;
  cfg.t_dim = 3;
  cfg.l_size = 2;
  EXPECT_THROW(sample_eg_code(cfg), Error);
}

TEST(EGToy, CodeValidation)
{
  auto code = make_eg_code(2, 2, 1, {{0, 1}, {1, 0}});
  EXPECT_EQ(code.index(1, 0), 1u);
  EXPECT_THROW(code.index(2, 0), Error);
  code.chosen_j = 5;
  EXPECT_THROW(code.validate(), Error);
  EXPECT_THROW(make_eg_code(2, 2, 1, {{0, 1}}), Error);
  EXPECT_THROW(make_eg_code(2, 1, 1, {{0, 3}}), Error);
  const auto dup = make_eg_code(2, 1, 2, {{0, 1}, {0, 1}});
  try {
    build_quantum_codewords(dup);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateWord);
  }
}

TEST(EGToy, WordIndexAndChannelOutput)
{
  EXPECT_EQ(word_index({1, 0, 1}), 5);
  EXPECT_EQ(word_index({0, 0, 1}), 1);
  const auto iso = excitation_iso(0.3);
  const Matrix vn = ts::isometry_power_grouped(iso, 3);
  for (const Word & w : {Word{0, 1, 1}, Word{1, 0, 0}}) {
    const Matrix out = channel_output(w, iso);
    const Index dwn = out.cols();
    for (Index b = 0; b < out.rows(); ++b) {
      for (Index x = 0; x < dwn; ++x) {
        EXPECT_NEAR(std::abs(out(b, x) - vn(b * dwn + x, word_index(w))), 0.0, 1e-15);
      }
    }
  }
  EXPECT_THROW(isometry_column(iso, 2), Error);
}

TEST(EGToy, CoherentPovmIsAnIsometry)
{
  const auto code = generic_code();
  const auto povm = eg_decoder_povm(code, excitation_iso(0.1));
  const Matrix d = coherent_povm_isometry(povm);
  EXPECT_TRUE(is_isometry(d, 1e-10));
}

TEST(EGToy, ProtocolStateIsNormalized)
{
  const auto code = generic_code();
  const auto iso = excitation_iso(0.1);
  const auto povm = eg_decoder_povm(code, iso);
  const auto tau = protocol_state(code, iso, povm);
  EXPECT_NEAR(tau.amplitudes().norm(), 1.0, 1e-10);
  EXPECT_EQ(tau.dim(), 2 * 2 * 16 * 16 * 4);
}

TEST(EGToy, PhaseAlignmentMakesOverlapsReal)
{
  const auto code = generic_code();
  const auto iso = excitation_iso(0.1);
  const auto povm = eg_decoder_povm(code, iso);
  const auto al = align_phases(code, iso, povm);
  EXPECT_NEAR(al.aligned_overlap.imag(), 0.0, 1e-12);
  EXPECT_GE(al.aligned_overlap.real(), std::abs(al.zero_phase_overlap) - 1e-12);
}

TEST(EGToy, UhlmannAchievesRootFidelity)
{
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rho = ts::random_density(3, rng);
    const Matrix sigma = ts::random_density(3, rng);
    const Matrix psi = rho.sqrt() * ts::random_unitary(3, rng);
    const Matrix theta = sigma.sqrt() * ts::random_isometry(4, 3, rng).adjoint();
    const auto u = uhlmann_isometry(psi, theta);
    EXPECT_TRUE(is_isometry(u.isometry, 1e-12));
    const Matrix mapped = psi * u.isometry.transpose();
    const Complex ov = (theta.conjugate().array() * mapped.array()).sum();
    EXPECT_NEAR(std::abs(ov), u.overlap, 1e-10);
    const Matrix r = rho.sqrt();
    const double f = std::pow((r * sigma * r).sqrt().trace().real(), 2);
    EXPECT_NEAR(u.overlap * u.overlap, f, 1e-9);
  }
  EXPECT_THROW(uhlmann_isometry(Matrix::Ones(2, 3), Matrix::Ones(2, 2)), Error);
}

TEST(EGToy, CanonicalPurification)
{
  std::mt19937_64 rng(52);
  const Matrix rho = ts::random_density(3, rng, 2);
  const Matrix p = canonical_purification(rho);
  EXPECT_LT(max_abs(p * p.adjoint() - rho), 1e-12);
}

TEST(EGToy, GhzToEpr)
{
  for (Index t : {2, 3}) {
    const Vector ghz = ghz_state(t);
    const Vector epr = PureState::maximally_entangled(t).amplitudes();
    for (Index j = 0; j < t; ++j) {
      const Vector out = ghz_to_epr(ghz, t, j);
      EXPECT_NEAR(std::abs(out.dot(epr)), 1.0, 1e-12);
    }
    const Matrix rho = ghz_to_epr_channel(ghz * ghz.adjoint(), t);
    EXPECT_NEAR(std::abs(epr.dot(rho * epr)), 1.0, 1e-12);
    std::mt19937_64 rng(53);
    const Matrix mixed = ts::random_density(t * t * t, rng);
    EXPECT_NEAR(ghz_to_epr_channel(mixed, t).trace().real(), 1.0, 1e-12);
    EXPECT_THROW(ghz_to_epr(ghz, t, t), Error);
  }
  EXPECT_THROW(ghz_to_epr(Vector::Zero(8), 2, 0), Error);
}

TEST(EGToy, NoiselessDisjointCodeIsPerfect)
{
  const auto code = make_eg_code(2, 2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}, 0.5);
  const auto r = eg_report(code, noiseless_iso(), EGDecoder::Auto, DecouplingTarget::Self);
  EXPECT_NEAR(r.fidelity, 1.0, 1e-9);
  EXPECT_NEAR(r.trace_distance_ghz, 0.0, 1e-6);
  for (double f : r.per_j_fidelity) {
    EXPECT_NEAR(f, 1.0, 1e-9);
  }
}

TEST(EGToy, GenericInstanceMatchesMonolithicOracle)
{
  const auto iso = excitation_iso(0.1);
  auto code = generic_code();
  const auto povm = eg_decoder_povm(code, iso);
  code.decode_phases = align_phases(code, iso, povm).decode_phases;
  for (auto target : {DecouplingTarget::Ideal, DecouplingTarget::Self}) {
    const auto dec = decoupling_decoder(code, iso, povm, target);
    EXPECT_LT(dec.isometry_defect, 1e-10);
    const auto assist = eliminate_assistance(code, iso, povm, dec);
    ASSERT_EQ(assist.per_j_fidelity.size(), 2u);
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(assist.per_j_fidelity[static_cast<std::size_t>(j)],
        ts::eg_fidelity_oracle(code, iso, povm, dec.gammas, j), 1e-9);
    }
    EXPECT_EQ(assist.best_j, 0);
  }
  // The full report chains the same steps.
  const auto r = eg_report(generic_code(), iso);
  const auto dec = decoupling_decoder(code, iso, povm, DecouplingTarget::Ideal);
  EXPECT_NEAR(r.fidelity, ts::eg_fidelity_oracle(code, iso, povm, dec.gammas, r.best_j), 1e-9);
}

TEST(EGToy, DecouplingTriangleInequality)
{
  const auto r = eg_report(generic_code(), excitation_iso(0.1));
  double secrecy = 0.0;
  double tau_eta = 0.0;
  for (const auto & [k, v] : r.diagnostics) {
    if (k == "secrecy_bound") {
      secrecy = v;
    }
    if (k == "tau_eta_trace_distance") {
      tau_eta = v;
    }
    if (k.find("isometry_defect") != std::string::npos && k != "encoder_isometry_defect") {
      EXPECT_LT(v, 1e-9) << k;
    }
  }
  EXPECT_LE(r.trace_distance_ghz, secrecy + tau_eta + 1e-9);
  EXPECT_EQ(r.diagnostics.size(), 12u);
}

TEST(EGToy, WardenMarginalPhaseInvariance)
{
  const auto iso = excitation_iso(0.1);
  const auto base = generic_code();
  const Matrix ref = protocol_willie_state(base, iso);
  // j-phases and constant per-message phases leave tau_W unchanged.
  for (int j = 0; j < base.t_dim; ++j) {
    auto code = base;
    for (int m = 0; m < code.t_dim; ++m) {
      for (int l = 0; l < code.l_size; ++l) {
        code.encode_phases[code.index(m, l)] += 2.0 * std::numbers::pi * j * m / code.t_dim + 0.37 * (m + 1);
      }
    }
    EXPECT_LT(max_abs(protocol_willie_state(code, iso) - ref), 1e-12);
  }
  // Phases that vary inside a bin change the cross terms.
  auto varied = base;
  varied.encode_phases[varied.index(0, 1)] = 1.1;
  EXPECT_GT(max_abs(protocol_willie_state(varied, iso) - ref), 1e-6);
}

TEST(EGToy, BudgetAndDimensionChecks)
{
  EGConfig cfg;
  cfg.max_dim = 100;
  try {
    eg_report(excitation_iso(0.1), cfg);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
  cfg = EGConfig{};
  cfg.gamma = 5.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(EGToy, ReportIsDeterministic)
{
  EGConfig cfg;
  const auto iso = excitation_iso(0.1);
  const auto a = eg_report(iso, cfg);
  const auto b = eg_report(iso, cfg);
  EXPECT_EQ(a.fidelity, b.fidelity);
  EXPECT_EQ(a.covert_divergence, b.covert_divergence);
  EXPECT_GE(a.covert_divergence, 0.0);
  EXPECT_NEAR(a.mean_fidelity, a.fidelity, 1e-12);
}

}  // namespace
