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

#ifndef COVERTQ__OPERATOR_CORE_HPP_
#define COVERTQ__OPERATOR_CORE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "covertq/error.hpp"

/// Dense complex-matrix primitives for finite-dimensional quantum states.
///
/// Every operator is an `Eigen::MatrixXcd`. Hermitian inputs are checked
/// against `Tolerances::herm` and symmetrized before any eigensolve, so the
/// spectral routines always see an exactly Hermitian matrix.
namespace covertq
{

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Tolerances
{
  double herm = 1e-9;
  double psd = 1e-9;
  double trace = 1e-9;
  double cluster = 1e-10;
  double support = 1e-10;

  void validate() const
  {
    if (!(herm > 0 && psd > 0 && trace > 0 && cluster > 0 && support > 0)) {
      throw Error(ErrorKind::InvalidParameter, "all tolerances must be positive");
    }
  }
};

inline double max_abs(const Matrix & m)
{
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_square(const Matrix & m, const char * what)
{
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(
      ErrorKind::DimMismatch,
      std::string(what) + " must be a non-empty square matrix");
  }
}

inline void require_same_dim(const Matrix & a, const Matrix & b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(
      ErrorKind::DimMismatch,
      "operand dimensions differ: " + std::to_string(a.rows()) + " vs " +
      std::to_string(b.rows()));
  }
}

inline bool is_hermitian(const Matrix & m, double tol)
{
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

/// Throws NotHermitian unless `m` is Hermitian within `tol`; returns the
/// symmetrized matrix.
inline Matrix hermitian_part(const Matrix & m, double tol)
{
  require_square(m, "Hermitian operator");
  const double asym = max_abs(m - m.adjoint());
  if (!(asym <= tol)) {
    throw Error(
      ErrorKind::NotHermitian,
      "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  return 0.5 * (m + m.adjoint());
}

/// Eigenvalues in decreasing order with matching eigenvector columns.
struct HermitianEigen
{
  RealVector values;
  Matrix vectors;
};

inline HermitianEigen eigh(const Matrix & h, const Tolerances & tol = {})
{
  const Matrix sym = hermitian_part(h, tol.herm);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidParameter, "eigensolver failed to converge");
  }
  const Index n = sym.rows();
  HermitianEigen out{RealVector(n), Matrix(n, n)};
  // Eigen returns ascending order.
  for (Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

struct SpectralCluster
{
  double value;
  /// Orthonormal columns spanning the eigenspace.
  Matrix basis;

  Matrix projector() const {return basis * basis.adjoint();}
  Index multiplicity() const {return basis.cols();}
};

/// sigma = sum_i value_i * projector_i with strictly decreasing values.
struct SpectralDecomposition
{
  std::vector<SpectralCluster> clusters;

  Index dim() const {return clusters.empty() ? 0 : clusters.front().basis.rows();}

  Matrix reconstruct() const
  {
    Matrix out = Matrix::Zero(dim(), dim());
    for (const auto & c : clusters) {
      out += c.value * c.projector();
    }
    return out;
  }

  /// Eigenvector matrix with columns grouped cluster by cluster.
  Matrix eigenbasis() const
  {
    Matrix u(dim(), dim());
    Index col = 0;
    for (const auto & c : clusters) {
      u.middleCols(col, c.multiplicity()) = c.basis;
      col += c.multiplicity();
    }
    return u;
  }

  /// Cluster index of each column of eigenbasis().
  std::vector<std::size_t> cluster_labels() const
  {
    std::vector<std::size_t> labels;
    labels.reserve(static_cast<std::size_t>(dim()));
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      labels.insert(labels.end(), static_cast<std::size_t>(clusters[i].multiplicity()), i);
    }
    return labels;
  }
};

/// Groups eigenvalues whose consecutive gaps are below `tol.cluster`.
inline SpectralDecomposition cluster_spectrum(const HermitianEigen & eig, const Tolerances & tol)
{
  SpectralDecomposition out;
  const Index n = eig.values.size();
  Index start = 0;
  while (start < n) {
    Index stop = start + 1;
    while (stop < n && eig.values(stop - 1) - eig.values(stop) < tol.cluster) {
      ++stop;
    }
    const double mean = eig.values.segment(start, stop - start).mean();
    out.clusters.push_back({mean, eig.vectors.middleCols(start, stop - start)});
    start = stop;
  }
  return out;
}

inline SpectralDecomposition spectral_decompose(const Matrix & h, const Tolerances & tol = {})
{
  return cluster_spectrum(eigh(h, tol), tol);
}

/// f applied to each eigenvalue: V diag(f(lambda)) V^dagger.
template<typename F>
Matrix spectral_function(const HermitianEigen & eig, F && f)
{
  RealVector mapped(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i) {
    mapped(i) = f(eig.values(i));
  }
  return eig.vectors * mapped.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

/// Power restricted to the support: eigenvalues at or below `tol.support`
/// map to zero. Exponent 0 yields the support projector.
inline Matrix support_power(const HermitianEigen & eig, double exponent, const Tolerances & tol)
{
  return spectral_function(
    eig, [&](double x) {return x > tol.support ? std::pow(x, exponent) : 0.0;});
}

inline Matrix sqrt_psd(const Matrix & h, const Tolerances & tol = {})
{
  return spectral_function(eigh(h, tol), [](double x) {return x > 0 ? std::sqrt(x) : 0.0;});
}

inline Matrix tensor(const Matrix & a, const Matrix & b)
{
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector tensor(const Vector & a, const Vector & b)
{
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

inline Matrix tensor_power(const Matrix & a, int n)
{
  if (n < 0) {
    throw Error(ErrorKind::InvalidParameter, "tensor power must be nonnegative");
  }
  Matrix out = Matrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    out = tensor(out, a);
  }
  return out;
}

inline Index product_of(std::span<const Index> dims)
{
  Index p = 1;
  for (Index d : dims) {
    if (d < 1) {
      throw Error(ErrorKind::DimMismatch, "subsystem dimensions must be positive");
    }
    p *= d;
  }
  return p;
}

namespace detail
{

/// Maps (kept multi-index, traced multi-index) to the flat row-major index.
struct SubsystemSplit
{
  Index kept_dim = 1;
  Index traced_dim = 1;
  std::vector<Index> flat;  // flat[k * traced_dim + t]
};

inline SubsystemSplit split_subsystems(std::span<const Index> dims, std::span<const int> keep)
{
  const std::size_t nsys = dims.size();
  std::vector<bool> kept(nsys, false);
  for (int k : keep) {
    if (k < 0 || static_cast<std::size_t>(k) >= nsys || kept[static_cast<std::size_t>(k)]) {
      throw Error(ErrorKind::DimMismatch, "invalid subsystem index in keep set");
    }
    kept[static_cast<std::size_t>(k)] = true;
  }
  std::vector<Index> stride(nsys, 1);
  for (std::size_t i = nsys; i-- > 1; ) {
    stride[i - 1] = stride[i] * dims[i];
  }
  // Kept subsystems are ordered as they appear in `dims`.
  std::vector<std::size_t> kept_sys, traced_sys;
  for (std::size_t i = 0; i < nsys; ++i) {
    (kept[i] ? kept_sys : traced_sys).push_back(i);
  }
  SubsystemSplit split;
  for (auto i : kept_sys) {split.kept_dim *= dims[i];}
  for (auto i : traced_sys) {split.traced_dim *= dims[i];}
  split.flat.resize(static_cast<std::size_t>(split.kept_dim * split.traced_dim));

  auto offset = [&](const std::vector<std::size_t> & systems, Index linear) {
      Index off = 0;
      for (std::size_t s = systems.size(); s-- > 0; ) {
        const std::size_t sys = systems[s];
        off += (linear % dims[sys]) * stride[sys];
        linear /= dims[sys];
      }
      return off;
    };
  for (Index k = 0; k < split.kept_dim; ++k) {
    const Index base = offset(kept_sys, k);
    for (Index t = 0; t < split.traced_dim; ++t) {
      split.flat[static_cast<std::size_t>(k * split.traced_dim + t)] = base + offset(traced_sys, t);
    }
  }
  return split;
}

}  // namespace detail

/// Traces out every subsystem not listed in `keep`.
inline Matrix partial_trace(const Matrix & rho, std::span<const Index> dims, std::span<const int> keep)
{
  require_square(rho, "partial trace input");
  if (product_of(dims) != rho.rows()) {
    throw Error(ErrorKind::DimMismatch, "subsystem dimensions do not multiply to the operator dimension");
  }
  const auto split = detail::split_subsystems(dims, keep);
  Matrix out = Matrix::Zero(split.kept_dim, split.kept_dim);
  for (Index i = 0; i < split.kept_dim; ++i) {
    for (Index j = 0; j < split.kept_dim; ++j) {
      Complex acc = 0;
      for (Index t = 0; t < split.traced_dim; ++t) {
        acc += rho(
          split.flat[static_cast<std::size_t>(i * split.traced_dim + t)],
          split.flat[static_cast<std::size_t>(j * split.traced_dim + t)]);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

/// Reduced density matrix of a pure state vector.
inline Matrix reduced_state(const Vector & psi, std::span<const Index> dims, std::span<const int> keep)
{
  if (product_of(dims) != psi.size()) {
    throw Error(ErrorKind::DimMismatch, "subsystem dimensions do not multiply to the vector length");
  }
  const auto split = detail::split_subsystems(dims, keep);
  Matrix reshaped(split.kept_dim, split.traced_dim);
  for (Index k = 0; k < split.kept_dim; ++k) {
    for (Index t = 0; t < split.traced_dim; ++t) {
      reshaped(k, t) = psi(split.flat[static_cast<std::size_t>(k * split.traced_dim + t)]);
    }
  }
  return reshaped * reshaped.adjoint();
}

/// Schatten 1-norm. Hermitian inputs use the eigenvalues, others an SVD.
inline double trace_norm(const Matrix & a, const Tolerances & tol = {})
{
  if (a.rows() == a.cols() && is_hermitian(a, tol.herm)) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

inline void require_dim_at_least_one(Index d)
{
  if (d < 1) {
    throw Error(ErrorKind::DimMismatch, "dimension must be at least 1");
  }
}

/// Hermitian, positive semidefinite, unit-trace operator.
///
/// Construction validates the matrix; eigenvalues in [-psd, 0) are clamped
/// to zero and the trace renormalized.
class DensityOperator
{
public:
  explicit DensityOperator(const Matrix & m, const Tolerances & tol = {})
  {
    auto eig = eigh(m, tol);
    const double trace = eig.values.sum();
    if (std::abs(trace - 1.0) > tol.trace) {
      throw Error(ErrorKind::NotDensity, "trace " + std::to_string(trace) + " differs from 1");
    }
    const double min_eig = eig.values.minCoeff();
    if (min_eig < -tol.psd) {
      throw Error(
        ErrorKind::NotDensity, "negative eigenvalue " + std::to_string(min_eig));
    }
    if (min_eig < 0) {
      eig.values = eig.values.cwiseMax(0.0);
      eig.values /= eig.values.sum();
      m_ = eig.vectors * eig.values.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    } else {
      m_ = 0.5 * (m + m.adjoint());
    }
  }

  /// Wraps a matrix that is a density operator by construction.
  static DensityOperator unchecked(Matrix m)
  {
    DensityOperator d;
    d.m_ = std::move(m);
    return d;
  }

  static DensityOperator from_pure(const Vector & amplitudes)
  {
    return unchecked(amplitudes * amplitudes.adjoint() / amplitudes.squaredNorm());
  }

  static DensityOperator diagonal(const std::vector<double> & probs, const Tolerances & tol = {})
  {
    Matrix m = Matrix::Zero(static_cast<Index>(probs.size()), static_cast<Index>(probs.size()));
    for (std::size_t i = 0; i < probs.size(); ++i) {
      m(static_cast<Index>(i), static_cast<Index>(i)) = probs[i];
    }
    return DensityOperator(m, tol);
  }

  static DensityOperator maximally_mixed(Index dim)
  {
    require_dim_at_least_one(dim);
    return unchecked(Matrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  const Matrix & matrix() const {return m_;}
  Index dim() const {return m_.rows();}

private:
  DensityOperator() = default;
  Matrix m_;
};

inline DensityOperator tensor(const DensityOperator & a, const DensityOperator & b)
{
  return DensityOperator::unchecked(tensor(a.matrix(), b.matrix()));
}

inline DensityOperator tensor_power(const DensityOperator & a, int n)
{
  return DensityOperator::unchecked(tensor_power(a.matrix(), n));
}

inline DensityOperator partial_trace(
  const DensityOperator & rho, std::span<const Index> dims, std::span<const int> keep)
{
  return DensityOperator::unchecked(partial_trace(rho.matrix(), dims, keep));
}

/// Unit-norm state vector.
class PureState
{
public:
  explicit PureState(Vector amplitudes, const Tolerances & tol = {})
  : amps_(std::move(amplitudes))
  {
    require_dim_at_least_one(amps_.size());
    if (std::abs(amps_.norm() - 1.0) > tol.trace) {
      throw Error(ErrorKind::NotDensity, "state vector is not normalized");
    }
  }

  static PureState basis(Index dim, Index index)
  {
    if (index < 0 || index >= dim) {
      throw Error(ErrorKind::IndexOutOfRange, "basis index out of range");
    }
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return PureState(std::move(v));
  }

  /// (1/sqrt(d)) sum_i |i>|i>.
  static PureState maximally_entangled(Index d)
  {
    Vector v = Vector::Zero(d * d);
    for (Index i = 0; i < d; ++i) {
      v(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
    }
    return PureState(std::move(v));
  }

  const Vector & amplitudes() const {return amps_;}
  Index dim() const {return amps_.size();}
  DensityOperator density() const {return DensityOperator::from_pure(amps_);}

private:
  Vector amps_;
};

/// F(rho, sigma) = || sqrt(rho) sqrt(sigma) ||_1^2, clamped to [0, 1].
inline double fidelity(const Matrix & rho, const Matrix & sigma, const Tolerances & tol = {})
{
  require_same_dim(rho, sigma);
  const Matrix root = sqrt_psd(rho, tol);
  const Matrix inner = root * sigma * root;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0;
  for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
    s += std::sqrt(std::max(solver.eigenvalues()(i), 0.0));
  }
  return std::clamp(s * s, 0.0, 1.0);
}

inline double fidelity(const DensityOperator & rho, const DensityOperator & sigma, const Tolerances & tol = {})
{
  return fidelity(rho.matrix(), sigma.matrix(), tol);
}

/// <psi| sigma |psi>.
inline double fidelity(const PureState & psi, const DensityOperator & sigma)
{
  if (psi.dim() != sigma.dim()) {
    throw Error(ErrorKind::DimMismatch, "state dimensions differ");
  }
  return std::clamp(psi.amplitudes().dot(sigma.matrix() * psi.amplitudes()).real(), 0.0, 1.0);
}

/// Projector onto the span of eigenvectors with eigenvalue >= 0. Eigenvalues
/// within `tol.support` of zero count as zero and are kept.
inline Matrix nonneg_eigenspace_projector(const Matrix & p, const Tolerances & tol = {})
{
  const auto eig = eigh(p, tol);
  Index count = 0;
  while (count < eig.values.size() && eig.values(count) >= -tol.support) {
    ++count;
  }
  const auto basis = eig.vectors.leftCols(count);
  return basis * basis.adjoint();
}

/// sum_j Pi_j Q Pi_j over the eigenprojectors of a precomputed decomposition.
inline Matrix pinching(const Matrix & q, const SpectralDecomposition & reference)
{
  if (q.rows() != reference.dim() || q.cols() != reference.dim()) {
    throw Error(ErrorKind::DimMismatch, "pinching operand and reference dimensions differ");
  }
  const Matrix u = reference.eigenbasis();
  const auto labels = reference.cluster_labels();
  Matrix rotated = u.adjoint() * q * u;
  for (Index i = 0; i < rotated.rows(); ++i) {
    for (Index j = 0; j < rotated.cols(); ++j) {
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) {
        rotated(i, j) = 0;
      }
    }
  }
  return u * rotated * u.adjoint();
}

inline Matrix pinching(const Matrix & q, const Matrix & p, const Tolerances & tol = {})
{
  require_same_dim(q, p);
  return pinching(q, spectral_decompose(p, tol));
}

/// Fourier, Heisenberg-Weyl shift and phase, and the qudit CNOT.
struct StandardUnitaries
{
  Matrix fourier;
  Matrix shift_x;
  Matrix phase_z;
  /// sum_j |j><j| (x) X^j on control (x) target.
  Matrix cnot;
};

inline Matrix fourier_unitary(Index d)
{
  Matrix f(d, d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (Index k = 0; k < d; ++k) {
    for (Index j = 0; j < d; ++j) {
      // Reduce k*j mod d first so the angle stays small and exact for d=2.
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * j) % d) / static_cast<double>(d);
      f(k, j) = norm * std::polar(1.0, angle);
    }
  }
  return f;
}

inline Matrix shift_unitary(Index d)
{
  Matrix x = Matrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    x((j + 1) % d, j) = 1.0;
  }
  return x;
}

/// Z^power with Z|j> = exp(2 pi i j / d)|j>; negative powers allowed.
inline Matrix phase_unitary(Index d, Index power = 1)
{
  Matrix z = Matrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    const Index e = (((j * power) % d) + d) % d;
    z(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(d));
  }
  return z;
}

inline StandardUnitaries standard_unitaries(Index d)
{
  if (d < 2) {
    throw Error(ErrorKind::InvalidParameter, "standard unitaries need dimension >= 2");
  }
  StandardUnitaries u;
  u.fourier = fourier_unitary(d);
  u.shift_x = shift_unitary(d);
  u.phase_z = phase_unitary(d);
  u.cnot = Matrix::Zero(d * d, d * d);
  Matrix xp = Matrix::Identity(d, d);
  for (Index j = 0; j < d; ++j) {
    Matrix ket_bra = Matrix::Zero(d, d);
    ket_bra(j, j) = 1.0;
    u.cnot += tensor(ket_bra, xp);
    xp = u.shift_x * xp;
  }
  return u;
}

inline bool is_isometry(const Matrix & v, double tol)
{
  return max_abs(v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())) <= tol;
}

/// True when supp(contained) lies in supp(container): every eigenvector of
/// `contained` with eigenvalue above `tol.support` leaves a residual below
/// sqrt(tol.support) after projection onto the container's support.
inline bool support_included(
  const HermitianEigen & contained, const HermitianEigen & container, const Tolerances & tol)
{
  Index rank = 0;
  while (rank < container.values.size() && container.values(rank) > tol.support) {
    ++rank;
  }
  const auto basis = container.vectors.leftCols(rank);
  const double limit = std::sqrt(tol.support);
  for (Index i = 0; i < contained.values.size(); ++i) {
    if (contained.values(i) <= tol.support) {
      break;
    }
    const Vector v = contained.vectors.col(i);
    const Vector residual = v - basis * (basis.adjoint() * v);
    if (residual.norm() >= limit) {
      return false;
    }
  }
  return true;
}

inline bool support_included(const Matrix & contained, const Matrix & container, const Tolerances & tol = {})
{
  require_same_dim(contained, container);
  return support_included(eigh(contained, tol), eigh(container, tol), tol);
}

}  // namespace covertq

#endif  // COVERTQ__OPERATOR_CORE_HPP_
