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
#include <random>
#include <set>
#include <vector>

#include "covertq/capacities.hpp"
#include "covertq/covert_sim.hpp"
#include "test_support.hpp"

namespace
{

using namespace covertq;
namespace ts = testing_support;

BinaryCovertChannel excitation(double g)
{
  return build_covert_channel(stinespring_from_kraus(excitation_channel(g)));
}

BinaryCovertChannel random_channel(std::mt19937_64 & rng)
{
  return build_covert_channel(stinespring_from_kraus(KrausChannel(ts::random_kraus(2, 2, 2, rng))));
}

SimConfig small_config(int n, double alpha, int m, int l)
{
  SimConfig cfg;
  cfg.n = n;
  cfg.gamma = alpha * std::sqrt(static_cast<double>(n));
  cfg.m_size = m;
  cfg.l_size = l;
  cfg.samples = 5;
  return cfg;
}

TEST(CovertSim, CodebookIndexingAndValidation)
{
  std::vector<Word> words{{0, 1}, {1, 1}, {0, 0}, {1, 0}};
  const Codebook cb(2, 2, 2, words);
  EXPECT_EQ(cb.index(1, 0), 2u);
  EXPECT_EQ(cb.word(1, 1), (Word{1, 0}));
  EXPECT_THROW(cb.index(2, 0), Error);
  EXPECT_THROW(Codebook(2, 2, 1, words), Error);
  EXPECT_THROW(Codebook(3, 2, 2, words), Error);
  EXPECT_THROW(Codebook(2, 1, 1, {{0, 2}}), Error);
  // One-time pad: key k shifts the in-bin index.
  EXPECT_EQ(otp_encode(0, 1, 1, cb), cb.word(0, 0));
  EXPECT_EQ(otp_encode(1, 0, 1, cb), cb.word(1, 1));
  EXPECT_THROW(otp_encode(0, 0, 2, cb), Error);
}

TEST(CovertSim, SamplingIsDeterministicAndUnbiased)
{
  const auto a = sample_codebook(12, 8, 8, 0.3, 7, 0);
  const auto b = sample_codebook(12, 8, 8, 0.3, 7, 0);
  const auto c = sample_codebook(12, 8, 8, 0.3, 7, 1);
  const auto d = sample_codebook(12, 8, 8, 0.3, 8, 0);
  EXPECT_EQ(a.words(), b.words());
  EXPECT_NE(a.words(), c.words());
  EXPECT_NE(a.words(), d.words());
  const auto big = sample_codebook(50, 20, 20, 0.3, 1, 0);
  double ones = 0;
  for (const auto & w : big.words()) {
    for (auto bit : w) {
      ones += bit;
    }
  }
  const double trials = 50.0 * 400.0;
  EXPECT_NEAR(ones / trials, 0.3, 4.0 * std::sqrt(0.3 * 0.7 / trials));
  EXPECT_THROW(sample_codebook(4, 2, 2, 1.5, 1, 0), Error);
  const auto zeros = sample_codebook(6, 2, 2, 0.0, 1, 0);
  for (const auto & w : zeros.words()) {
    EXPECT_EQ(w, Word(6, 0));
  }
}

TEST(CovertSim, DenseWardenStateMatchesEnumeration)
{
  std::mt19937_64 rng(41);
  const auto ch = random_channel(rng);
  const auto cb = sample_codebook(4, 3, 2, 0.4, 3, 0);
  const Matrix oracle = ts::average_by_enumeration(cb.words(), ch.omega0().matrix(), ch.omega1().matrix());
  EXPECT_LT(max_abs(willie_average_state(cb, ch).matrix() - oracle), 1e-14);
  std::vector<Word> bin(cb.words().begin() + 2, cb.words().begin() + 4);
  const Matrix bin_oracle = ts::average_by_enumeration(bin, ch.omega0().matrix(), ch.omega1().matrix());
  EXPECT_LT(max_abs(willie_bin_state(cb, ch, 1).matrix() - bin_oracle), 1e-14);
  EXPECT_THROW(willie_bin_state(cb, ch, 3), Error);
}

TEST(CovertSim, CommutingPathMatchesDense)
{
  const auto ch = excitation(0.25);
  const auto cb = sample_codebook(6, 4, 4, 0.25, 9, 0);
  const Matrix dense = willie_average_state(cb, ch, ComputePath::Dense).matrix();
  const Matrix fast = willie_average_state(cb, ch, ComputePath::Commuting).matrix();
  EXPECT_LT(max_abs(dense - fast), 1e-14);

  // Commuting but not diagonal: rotate both warden states by one unitary.
  std::mt19937_64 rng(42);
  const Matrix u = ts::random_unitary(2, rng);
  const BinaryCovertChannel rot(
    ch.sigma0(), ch.sigma1(), DensityOperator::unchecked(u * ch.omega0().matrix() * u.adjoint()),
    DensityOperator::unchecked(u * ch.omega1().matrix() * u.adjoint()));
  const auto basis = common_eigenbasis(rot.omega0().matrix(), rot.omega1().matrix());
  ASSERT_TRUE(basis.has_value());
  EXPECT_FALSE(basis->identity_basis);
  EXPECT_LT(
    max_abs(willie_average_state(cb, rot, ComputePath::Dense).matrix() -
    willie_average_state(cb, rot, ComputePath::Commuting).matrix()), 1e-12);
}

TEST(CovertSim, NonCommutingRejectsFastPath)
{
  std::mt19937_64 rng(43);
  const auto ch = random_channel(rng);
  EXPECT_FALSE(common_eigenbasis(ch.omega0().matrix(), ch.omega1().matrix()).has_value());
  auto cfg = small_config(4, 0.3, 2, 2);
  cfg.path = ComputePath::Commuting;
  try {
    covertness_report(sample_codebook(cfg), ch, cfg);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
}

TEST(CovertSim, BudgetIsEnforced)
{
  const auto ch = excitation(0.25);
  const auto cb = sample_codebook(6, 2, 2, 0.2, 1, 0);
  try {
    willie_average_state(cb, ch, ComputePath::Dense, 32);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
    EXPECT_NE(std::string(e.what()).find("2^6"), std::string::npos);
  }
  auto cfg = small_config(6, 0.2, 2, 2);
  cfg.max_decoder_codewords = 3;
  EXPECT_THROW(sqrt_measurement_decoder(cb, ch, cfg), Error);
}

TEST(CovertSim, ResolvabilityBoundStructure)
{
  const auto ch = excitation(0.25);
  const std::vector<double> s_grid{-1.0, -0.5, -0.25, -0.1, -0.05};
  const auto bound = resolvability_rhs(ch, 8, 0.25, 64.0, s_grid, {});
  EXPECT_EQ(bound.nu, 9u);
  // The reported minimum is the bound evaluated at its own (s, beta).
  const CqEnsemble ens({0.75, 0.25}, {ch.omega0(), ch.omega1()});
  const double recomputed =
    2.0 * std::sqrt(std::exp(bound.beta * bound.s + 8.0 * phi(bound.s, ens))) +
    std::sqrt(std::exp(bound.beta) * 9.0 / 64.0);
  EXPECT_NEAR(bound.value, recomputed, 1e-12 * recomputed);
  // No grid point beats it.
  for (double s : s_grid) {
    for (double beta : default_beta_grid(ch, 8, 0.25)) {
      const double v = 2.0 * std::sqrt(std::exp(beta * s + 8.0 * phi(s, ens))) + std::sqrt(std::exp(beta) * 9.0 / 64.0);
      EXPECT_GE(v, bound.value - 1e-12);
    }
  }
  // More codewords never loosen the bound.
  EXPECT_LE(resolvability_rhs(ch, 8, 0.25, 256.0, s_grid, {}).value, bound.value);
  EXPECT_THROW(resolvability_rhs(ch, 8, 0.25, 0.5, s_grid, {}), Error);
}

TEST(CovertSim, ResolvabilityExperimentHolds)
{
  const auto ch = excitation(0.25);
  auto cfg = small_config(8, 0.25, 16, 4);
  cfg.samples = 30;
  const auto r = resolvability_experiment(cfg, ch);
  EXPECT_EQ(r.codebook_size, 64u);
  EXPECT_EQ(r.distances.size(), 30u);
  EXPECT_TRUE(r.holds);
  EXPECT_GT(r.std_error, 0.0);
  // Dense and commuting evaluations agree sample by sample.
  cfg.path = ComputePath::Commuting;
  const auto fast = resolvability_experiment(cfg, ch);
  for (std::size_t i = 0; i < r.distances.size(); ++i) {
    EXPECT_NEAR(r.distances[i], fast.distances[i], 1e-10);
  }
}

TEST(CovertSim, CovertnessReportIdentities)
{
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 3; ++trial) {
    const auto ch = random_channel(rng);
    const auto cfg = small_config(4, 0.3, 4, 2);
    const auto cb = sample_codebook(cfg, static_cast<std::uint64_t>(trial));
    const auto r = covertness_report(cb, ch, cfg);
    EXPECT_EQ(r.method, "dense");
    const Matrix rho = ts::average_by_enumeration(cb.words(), ch.omega0().matrix(), ch.omega1().matrix());
    const Matrix w0n = tensor_power(ch.omega0().matrix(), 4);
    EXPECT_NEAR(r.d_covert, ts::qre_matrix_log(rho, w0n), 1e-8);
    EXPECT_NEAR(r.helstrom_error, 0.5 * (1.0 - 0.5 * ts::trace_norm_svd(rho - w0n)), 1e-12);
    EXPECT_NEAR(r.pinsker_lower_bound, 0.5 * (1.0 - std::sqrt(0.5 * r.d_covert)), 1e-15);
    EXPECT_GE(r.helstrom_error, r.pinsker_lower_bound - 1e-12);
  }
}

TEST(CovertSim, CommutingExactMatchesDenseReport)
{
  const auto ch = excitation(0.25);
  auto cfg = small_config(6, 0.25, 4, 4);
  const auto cb = sample_codebook(cfg);
  const auto dense = covertness_report(cb, ch, cfg);
  cfg.path = ComputePath::Commuting;
  const auto fast = covertness_report(cb, ch, cfg);
  EXPECT_EQ(fast.method, "commuting-exact");
  EXPECT_NEAR(dense.d_covert, fast.d_covert, 1e-10);
  EXPECT_NEAR(dense.trace_dist_to_mixed, fast.trace_dist_to_mixed, 1e-10);
  EXPECT_NEAR(dense.helstrom_error, fast.helstrom_error, 1e-10);
  EXPECT_NEAR(dense.resolvability_rhs, fast.resolvability_rhs, 1e-15);
  const auto s_dense = secrecy_report(cb, ch, small_config(6, 0.25, 4, 4));
  const auto s_fast = secrecy_report(cb, ch, cfg);
  ASSERT_EQ(s_dense.per_bin_distances.size(), 4u);
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_NEAR(s_dense.per_bin_distances[m], s_fast.per_bin_distances[m], 1e-10);
  }
  EXPECT_NEAR(s_dense.average_leakage, s_fast.average_leakage, 1e-10);
}

TEST(CovertSim, MonteCarloAgreesWithExactWithinErrorBars)
{
  const auto ch = excitation(0.25);
  auto cfg = small_config(10, 0.25, 8, 4);
  cfg.path = ComputePath::Commuting;
  const auto cb = sample_codebook(cfg);
  const auto exact = covertness_report(cb, ch, cfg);
  cfg.max_classical_dim = 512;
  cfg.mc_samples = 40000;
  const auto mc = covertness_report(cb, ch, cfg);
  EXPECT_EQ(mc.method, "commuting-monte-carlo");
  EXPECT_GT(mc.d_covert_std_err, 0.0);
  EXPECT_NEAR(mc.d_covert, exact.d_covert, 5.0 * mc.d_covert_std_err + 1e-3);
  EXPECT_NEAR(mc.trace_dist_to_mixed, exact.trace_dist_to_mixed, 5.0 * mc.trace_dist_std_err + 1e-3);
  EXPECT_NEAR(mc.helstrom_error, exact.helstrom_error, 5.0 * mc.helstrom_std_err + 1e-3);
  // Same seed, same estimate.
  EXPECT_EQ(covertness_report(cb, ch, cfg).d_covert, mc.d_covert);
}

TEST(CovertSim, DecoderMatchesDenseOracle)
{
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 3; ++trial) {
    const auto ch = random_channel(rng);
    auto cfg = small_config(4, 0.4, 3, 2);
    cfg.seed = 100 + static_cast<std::uint64_t>(trial);
    const auto cb = sample_codebook(cfg);
    const auto report = sqrt_measurement_decoder(cb, ch, cfg);
    const double a = default_a_threshold(ch, 4, cfg.alpha());
    EXPECT_DOUBLE_EQ(report.a_threshold, a);
    const auto oracle = ts::decoder_errors_oracle(cb.words(), ch.sigma0().matrix(), ch.sigma1().matrix(), a);
    ASSERT_EQ(report.per_message_error.size(), oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      EXPECT_NEAR(report.per_message_error[k], std::clamp(oracle[k], 0.0, 1.0), 1e-9);
    }
  }
}

TEST(CovertSim, SquareRootMeasurementIsAPovm)
{
  std::mt19937_64 rng(46);
  std::vector<Matrix> states;
  for (int k = 0; k < 3; ++k) {
    states.push_back(ts::random_density(4, rng, 1));
  }
  const auto povm = square_root_measurement(states);
  Matrix total = povm.abstain;
  for (const auto & e : povm.elements) {
    EXPECT_GE(eigh(e).values.minCoeff(), -1e-12);
    total += e;
  }
  EXPECT_LT(max_abs(total - Matrix::Identity(4, 4)), 1e-12);
  EXPECT_GE(eigh(povm.abstain).values.minCoeff(), -1e-12);
  // Orthogonal pure states are decoded perfectly.
  std::vector<Matrix> basis;
  for (Index i = 0; i < 3; ++i) {
    Matrix p = Matrix::Zero(3, 3);
    p(i, i) = 1.0;
    basis.push_back(p);
  }
  const auto perfect = decoder_report(square_root_measurement(basis), basis);
  EXPECT_NEAR(perfect.max_error, 0.0, 1e-14);
  EXPECT_THROW(square_root_measurement({}), Error);
}

TEST(CovertSim, RunSimulationSections)
{
  const auto ch = excitation(0.25);
  auto cfg = small_config(6, 0.25, 4, 2);
  const auto full = run_simulation(ch, cfg);
  EXPECT_TRUE(full.secrecy.has_value());
  EXPECT_TRUE(full.decoder.has_value());
  EXPECT_TRUE(full.resolvability.has_value());
  EXPECT_TRUE(full.notes.empty());

  cfg.max_decoder_codewords = 4;
  const auto skipped = run_simulation(ch, cfg);
  EXPECT_FALSE(skipped.decoder.has_value());
  ASSERT_EQ(skipped.notes.size(), 1u);

  cfg.path = ComputePath::Commuting;
  cfg.max_classical_dim = 16;
  cfg.mc_samples = 200;
  const auto mc = run_simulation(ch, cfg);
  EXPECT_EQ(mc.covertness.method, "commuting-monte-carlo");
  EXPECT_FALSE(mc.secrecy.has_value());
  EXPECT_FALSE(mc.decoder.has_value());
  EXPECT_EQ(mc.notes.size(), 1u);
}

TEST(CovertSim, CovertnessScalingApproachesChiSquareLimit)
{
  const auto ch = excitation(0.25);
  const std::vector<int> ns{16, 36, 64, 144, 400};
  const auto pts = covertness_scaling(ch, 0.7, ns);
  const double target = 0.5 * 0.49 * (0.25 / 0.75);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(pts[i].target, target, 1e-14);
    const double a = pts[i].alpha;
    const double oracle = ns[i] * ts::kl_scalar({0.75 + 0.25 * a, 0.25 * (1.0 - a)}, {0.75, 0.25});
    EXPECT_NEAR(pts[i].n_divergence, oracle, 1e-12);
    if (i > 0) {
      EXPECT_LT(pts[i].relative_deviation, pts[i - 1].relative_deviation);
    }
  }
  EXPECT_THROW(covertness_scaling(ch, 2.0, {1}), Error);
}

TEST(CovertSim, ConfigValidation)
{
  SimConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.gamma = 10.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = SimConfig{};
  cfg.s_grid = {0.5};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = SimConfig{};
  cfg.mc_samples = 1;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
