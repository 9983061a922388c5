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

#include <random>
#include <vector>

#include "covertq/operator_core.hpp"
#include "test_support.hpp"

namespace
{

using namespace covertq;
using testing_support::random_density;
using testing_support::random_unitary;

TEST(OperatorCore, EighIsDescendingAndReconstructs)
{
  std::mt19937_64 rng(1);
  const Matrix rho = random_density(4, rng);
  const auto eig = eigh(rho);
  for (Index i = 1; i < 4; ++i) {
    EXPECT_GE(eig.values(i - 1), eig.values(i));
  }
  const Matrix back = eig.vectors * eig.values.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  EXPECT_LT(max_abs(back - rho), 1e-12);
}

TEST(OperatorCore, HermitianPartRejectsAsymmetry)
{
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  try {
    hermitian_part(m, 1e-9);
    FAIL() << "expected NotHermitian";
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
  }
}

TEST(OperatorCore, SpectralClustersMergeDegenerateValues)
{
  std::mt19937_64 rng(2);
  const Matrix u = random_unitary(4, rng);
  Eigen::VectorXd d(4);
  d << 0.4, 0.4, 0.15, 0.05;
  const Matrix h = u * d.cast<Complex>().asDiagonal() * u.adjoint();
  const auto dec = spectral_decompose(h);
  ASSERT_EQ(dec.clusters.size(), 3u);
  EXPECT_EQ(dec.clusters[0].multiplicity(), 2);
  EXPECT_NEAR(dec.clusters[0].value, 0.4, 1e-12);
  EXPECT_LT(max_abs(dec.reconstruct() - h), 1e-12);
}

TEST(OperatorCore, SqrtAndSupportPower)
{
  std::mt19937_64 rng(3);
  const Matrix rho = random_density(3, rng, 2);
  const Matrix root = sqrt_psd(rho);
  EXPECT_LT(max_abs(root * root - rho), 1e-12);
  const Matrix proj = support_power(eigh(rho), 0.0, Tolerances{});
  EXPECT_LT(max_abs(proj * proj - proj), 1e-10);
  EXPECT_NEAR(proj.trace().real(), 2.0, 1e-10);
  const Matrix inv = support_power(eigh(rho), -1.0, Tolerances{});
  EXPECT_LT(max_abs(rho * inv - proj), 1e-8);
}

TEST(OperatorCore, TensorMatchesLoopOracle)
{
  std::mt19937_64 rng(4);
  const Matrix a = testing_support::ginibre(2, 3, rng);
  const Matrix b = testing_support::ginibre(3, 2, rng);
  EXPECT_LT(max_abs(tensor(a, b) - testing_support::kron_loops(a, b)), 1e-15);
  const Matrix p = tensor_power(a.topLeftCorner(2, 2), 3);
  EXPECT_EQ(p.rows(), 8);
  EXPECT_EQ(tensor_power(a, 0), Matrix::Ones(1, 1));
}

TEST(OperatorCore, PartialTraceOfProductState)
{
  std::mt19937_64 rng(5);
  const Matrix a = random_density(2, rng);
  const Matrix b = random_density(3, rng);
  const Matrix c = random_density(2, rng);
  const Matrix abc = tensor(tensor(a, b), c);
  const std::vector<Index> dims{2, 3, 2};
  EXPECT_LT(max_abs(partial_trace(abc, dims, std::vector<int>{0}) - a), 1e-12);
  EXPECT_LT(max_abs(partial_trace(abc, dims, std::vector<int>{1}) - b), 1e-12);
  EXPECT_LT(max_abs(partial_trace(abc, dims, std::vector<int>{0, 2}) - tensor(a, c)), 1e-12);
  EXPECT_LT(max_abs(partial_trace(abc, dims, std::vector<int>{2, 0}) - tensor(a, c)), 1e-12);
}

TEST(OperatorCore, ReducedStateMatchesPartialTrace)
{
  std::mt19937_64 rng(6);
  const Vector psi = testing_support::random_pure(12, rng);
  const std::vector<Index> dims{3, 4};
  const Matrix full = psi * psi.adjoint();
  for (int keep : {0, 1}) {
    const std::vector<int> k{keep};
    EXPECT_LT(max_abs(reduced_state(psi, dims, k) - partial_trace(full, dims, k)), 1e-13);
  }
}

TEST(OperatorCore, TraceNormAgreesWithSingularValues)
{
  std::mt19937_64 rng(7);
  const Matrix d = random_density(4, rng) - random_density(4, rng);
  EXPECT_NEAR(trace_norm(d), testing_support::trace_norm_svd(d), 1e-12);
  const Matrix g = testing_support::ginibre(3, 3, rng);
  EXPECT_NEAR(trace_norm(g), testing_support::trace_norm_svd(g), 1e-12);
}

TEST(OperatorCore, DensityOperatorValidation)
{
  Matrix bad = Matrix::Identity(2, 2);
  EXPECT_THROW(DensityOperator{bad}, Error);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  try {
    DensityOperator d(neg);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotDensity);
  }
  // Tiny negative eigenvalues are clamped.
  Matrix almost = Matrix::Zero(2, 2);
  almost(0, 0) = 1.0 + 1e-12;
  almost(1, 1) = -1e-12;
  const DensityOperator ok(almost);
  EXPECT_GE(eigh(ok.matrix()).values.minCoeff(), 0.0);
  EXPECT_NEAR(ok.matrix().trace().real(), 1.0, 1e-15);
  EXPECT_EQ(DensityOperator::maximally_mixed(3).dim(), 3);
  EXPECT_THROW(DensityOperator::maximally_mixed(0), Error);
}

TEST(OperatorCore, FidelityAgainstMatrixSqrtOracle)
{
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rho = random_density(3, rng);
    const Matrix sigma = random_density(3, rng);
    const Matrix r = rho.sqrt();
    const Matrix inner = (r * sigma * r).sqrt();
    const double oracle = std::pow(inner.trace().real(), 2);
    EXPECT_NEAR(fidelity(rho, sigma), oracle, 1e-10);
    EXPECT_NEAR(fidelity(rho, sigma), fidelity(sigma, rho), 1e-10);
  }
  const Vector psi = testing_support::random_pure(3, rng);
  const Matrix sigma = random_density(3, rng);
  EXPECT_NEAR(fidelity(PureState(psi), DensityOperator::unchecked(sigma)), fidelity(psi * psi.adjoint(), sigma), 1e-10);
}

TEST(OperatorCore, PinchingCommutesWithReference)
{
  std::mt19937_64 rng(9);
  const Matrix p = tensor_power(random_density(2, rng), 3);
  const Matrix q = random_density(8, rng);
  const Matrix pq = pinching(q, p);
  EXPECT_LT(max_abs(pq * p - p * pq), 1e-12);
  EXPECT_NEAR(pq.trace().real(), 1.0, 1e-12);
  // Pinching is idempotent.
  EXPECT_LT(max_abs(pinching(pq, p) - pq), 1e-12);
}

TEST(OperatorCore, NonnegativeProjector)
{
  Matrix h = Matrix::Zero(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = -0.5;
  h(2, 2) = 0.0;
  const Matrix p = nonneg_eigenspace_projector(h);
  EXPECT_NEAR(p(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(p(1, 1).real(), 0.0, 1e-14);
  EXPECT_NEAR(p(2, 2).real(), 1.0, 1e-14);
}

TEST(OperatorCore, StandardUnitariesAlgebra)
{
  for (Index d : {2, 3, 5}) {
    const auto u = standard_unitaries(d);
    const Matrix id = Matrix::Identity(d, d);
    EXPECT_LT(max_abs(u.fourier * u.fourier.adjoint() - id), 1e-12);
    // Z X = omega X Z.
    const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / static_cast<double>(d));
    EXPECT_LT(max_abs(u.phase_z * u.shift_x - omega * u.shift_x * u.phase_z), 1e-12);
    // F diagonalizes the shift.
    const Matrix diag = u.fourier.adjoint() * u.shift_x * u.fourier;
    Matrix off = diag;
    off.diagonal().setZero();
    EXPECT_LT(max_abs(off), 1e-12);
    EXPECT_TRUE(is_isometry(u.cnot, 1e-12));
    EXPECT_LT(max_abs(phase_unitary(d, -1) * u.phase_z - id), 1e-12);
  }
  EXPECT_THROW(standard_unitaries(1), Error);
}

TEST(OperatorCore, SupportInclusion)
{
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  Matrix b = Matrix::Identity(2, 2) / 2.0;
  EXPECT_TRUE(support_included(a, b));
  EXPECT_FALSE(support_included(b, a));
  Matrix c = Matrix::Zero(2, 2);
  c(1, 1) = 1.0;
  EXPECT_FALSE(support_included(c, a));
}

TEST(OperatorCore, PureStateHelpers)
{
  const auto phi = PureState::maximally_entangled(3);
  const std::vector<Index> dims{3, 3};
  const Matrix half = reduced_state(phi.amplitudes(), dims, std::vector<int>{0});
  EXPECT_LT(max_abs(half - Matrix::Identity(3, 3) / 3.0), 1e-14);
  EXPECT_THROW(PureState::basis(2, 2), Error);
  Vector unnorm = Vector::Ones(2);
  EXPECT_THROW(PureState{unnorm}, Error);
}

}  // namespace
