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

#ifndef COVERTQ__CHANNELS_HPP_
#define COVERTQ__CHANNELS_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "covertq/divergences.hpp"
#include "covertq/operator_core.hpp"

namespace covertq
{

/// Trace-preserving map rho -> sum_k K_k rho K_k^dagger.
class KrausChannel
{
public:
  KrausChannel(std::vector<Matrix> kraus, const Tolerances & tol = {})
  : kraus_(std::move(kraus))
  {
    if (kraus_.empty()) {
      throw Error(ErrorKind::NotTracePreserving, "channel needs at least one Kraus operator");
    }
    in_dim_ = kraus_.front().cols();
    out_dim_ = kraus_.front().rows();
    Matrix sum = Matrix::Zero(in_dim_, in_dim_);
    for (const auto & k : kraus_) {
      if (k.rows() != out_dim_ || k.cols() != in_dim_) {
        throw Error(ErrorKind::DimMismatch, "Kraus operators differ in shape");
      }
      sum += k.adjoint() * k;
    }
    const double dev = max_abs(sum - Matrix::Identity(in_dim_, in_dim_));
    if (!(dev <= tol.herm)) {
      throw Error(
        ErrorKind::NotTracePreserving,
        "sum of K^dagger K deviates from identity by " + std::to_string(dev));
    }
  }

  Index in_dim() const {return in_dim_;}
  Index out_dim() const {return out_dim_;}
  const std::vector<Matrix> & kraus() const {return kraus_;}

  Matrix apply(const Matrix & rho) const
  {
    if (rho.rows() != in_dim_ || rho.cols() != in_dim_) {
      throw Error(ErrorKind::DimMismatch, "channel input dimension mismatch");
    }
    Matrix out = Matrix::Zero(out_dim_, out_dim_);
    for (const auto & k : kraus_) {
      out += k * rho * k.adjoint();
    }
    return out;
  }

  DensityOperator apply(const DensityOperator & rho) const
  {
    return DensityOperator::unchecked(apply(rho.matrix()));
  }

private:
  std::vector<Matrix> kraus_;
  Index in_dim_ = 0;
  Index out_dim_ = 0;
};

/// Isometry V : A -> B (x) W with B the leading tensor factor.
class StinespringIsometry
{
public:
  StinespringIsometry(Matrix v, Index out_dim_b, Index out_dim_w, const Tolerances & tol = {})
  : v_(std::move(v)), dim_b_(out_dim_b), dim_w_(out_dim_w)
  {
    if (dim_b_ < 1 || dim_w_ < 1 || v_.rows() != dim_b_ * dim_w_ || v_.cols() < 1) {
      throw Error(ErrorKind::DimMismatch, "isometry shape does not match output dimensions");
    }
    if (!is_isometry(v_, tol.herm)) {
      throw Error(ErrorKind::NotIsometry, "V^dagger V differs from the identity");
    }
  }

  const Matrix & matrix() const {return v_;}
  Index in_dim() const {return v_.cols();}
  Index out_dim_b() const {return dim_b_;}
  Index out_dim_w() const {return dim_w_;}

private:
  Matrix v_;
  Index dim_b_;
  Index dim_w_;
};

/// V = sum_k K_k (x) |k>_W.
inline StinespringIsometry stinespring_from_kraus(const KrausChannel & ch, const Tolerances & tol = {})
{
  const Index dw = static_cast<Index>(ch.kraus().size());
  Matrix v = Matrix::Zero(ch.out_dim() * dw, ch.in_dim());
  for (Index k = 0; k < dw; ++k) {
    const Matrix & kk = ch.kraus()[static_cast<std::size_t>(k)];
    for (Index b = 0; b < ch.out_dim(); ++b) {
      v.row(b * dw + k) = kk.row(b);
    }
  }
  return StinespringIsometry(std::move(v), ch.out_dim(), dw, tol);
}

/// Kraus operators (I (x) <k|_W) V of the channel to B.
inline KrausChannel channel_to_bob(const StinespringIsometry & iso, const Tolerances & tol = {})
{
  std::vector<Matrix> kraus;
  for (Index k = 0; k < iso.out_dim_w(); ++k) {
    Matrix op(iso.out_dim_b(), iso.in_dim());
    for (Index b = 0; b < iso.out_dim_b(); ++b) {
      op.row(b) = iso.matrix().row(b * iso.out_dim_w() + k);
    }
    kraus.push_back(std::move(op));
  }
  return KrausChannel(std::move(kraus), tol);
}

/// Complementary channel to W with Kraus operators (<b|_B (x) I) V.
inline KrausChannel channel_to_willie(const StinespringIsometry & iso, const Tolerances & tol = {})
{
  std::vector<Matrix> kraus;
  for (Index b = 0; b < iso.out_dim_b(); ++b) {
    kraus.push_back(iso.matrix().middleRows(b * iso.out_dim_w(), iso.out_dim_w()));
  }
  return KrausChannel(std::move(kraus), tol);
}

/// (I_B (x) U_W) V for a unitary U on the environment.
inline StinespringIsometry rotate_environment(
  const StinespringIsometry & iso, const Matrix & unitary_w, const Tolerances & tol = {})
{
  if (unitary_w.rows() != iso.out_dim_w() || unitary_w.cols() != iso.out_dim_w()) {
    throw Error(ErrorKind::DimMismatch, "environment unitary has the wrong dimension");
  }
  const Matrix rotated = tensor(Matrix::Identity(iso.out_dim_b(), iso.out_dim_b()), unitary_w) * iso.matrix();
  return StinespringIsometry(rotated, iso.out_dim_b(), iso.out_dim_w(), tol);
}

/// Joint B (x) W output V rho V^dagger.
inline DensityOperator apply_isometry(const StinespringIsometry & iso, const DensityOperator & rho)
{
  if (rho.dim() != iso.in_dim()) {
    throw Error(ErrorKind::DimMismatch, "isometry input dimension mismatch");
  }
  return DensityOperator::unchecked(iso.matrix() * rho.matrix() * iso.matrix().adjoint());
}

struct MarginalOutputs
{
  DensityOperator bob;
  DensityOperator willie;
};

/// sigma_x = tr_W and omega_x = tr_B of V|x><x|V^dagger.
inline MarginalOutputs marginal_outputs(const StinespringIsometry & iso, Index x)
{
  if (x < 0 || x >= iso.in_dim()) {
    throw Error(ErrorKind::IndexOutOfRange, "input symbol " + std::to_string(x) + " out of range");
  }
  const Vector out = iso.matrix().col(x);
  const std::vector<Index> dims{iso.out_dim_b(), iso.out_dim_w()};
  const std::vector<int> keep_b{0}, keep_w{1};
  return {
    DensityOperator::unchecked(reduced_state(out, dims, keep_b)),
    DensityOperator::unchecked(reduced_state(out, dims, keep_w))};
}

/// Qubit channel with K0 = sqrt(1-g)|0><0| + |1><1| and K1 = sqrt(g)|1><0|.
inline KrausChannel excitation_channel(double gamma)
{
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "excitation probability must lie in (0, 1]");
  }
  Matrix k0 = Matrix::Zero(2, 2);
  k0(0, 0) = std::sqrt(1.0 - gamma);
  k0(1, 1) = 1.0;
  Matrix k1 = Matrix::Zero(2, 2);
  k1(1, 0) = std::sqrt(gamma);
  return KrausChannel({k0, k1});
}

/// Receiver outputs (sigma0, sigma1) and warden outputs (omega0, omega1) for
/// the binary input alphabet, with supp(sigma1) in supp(sigma0),
/// supp(omega1) in supp(omega0), and omega1 != omega0.
class BinaryCovertChannel
{
public:
  BinaryCovertChannel(
    DensityOperator sigma0, DensityOperator sigma1, DensityOperator omega0, DensityOperator omega1,
    const Tolerances & tol = {})
  : sigma0_(std::move(sigma0)), sigma1_(std::move(sigma1)),
    omega0_(std::move(omega0)), omega1_(std::move(omega1))
  {
    if (sigma0_.dim() != sigma1_.dim() || omega0_.dim() != omega1_.dim()) {
      throw Error(ErrorKind::DimMismatch, "paired output states differ in dimension");
    }
    if (max_abs(omega1_.matrix() - omega0_.matrix()) <= tol.herm) {
      throw Error(ErrorKind::TrivialTest, "omega1 equals omega0; the warden's test is trivial");
    }
    if (!support_included(sigma1_.matrix(), sigma0_.matrix(), tol)) {
      throw Error(ErrorKind::AssumptionViolation, "supp(sigma1) is not contained in supp(sigma0)");
    }
    if (!support_included(omega1_.matrix(), omega0_.matrix(), tol)) {
      throw Error(ErrorKind::AssumptionViolation, "supp(omega1) is not contained in supp(omega0)");
    }
  }

  const DensityOperator & sigma0() const {return sigma0_;}
  const DensityOperator & sigma1() const {return sigma1_;}
  const DensityOperator & omega0() const {return omega0_;}
  const DensityOperator & omega1() const {return omega1_;}

  /// Receiver and warden exchanged.
  BinaryCovertChannel swapped(const Tolerances & tol = {}) const
  {
    return BinaryCovertChannel(omega0_, omega1_, sigma0_, sigma1_, tol);
  }

private:
  DensityOperator sigma0_;
  DensityOperator sigma1_;
  DensityOperator omega0_;
  DensityOperator omega1_;
};

inline BinaryCovertChannel build_covert_channel(const StinespringIsometry & iso, const Tolerances & tol = {})
{
  if (iso.in_dim() < 2) {
    throw Error(ErrorKind::DimMismatch, "covert channel needs at least two input symbols");
  }
  auto out0 = marginal_outputs(iso, 0);
  auto out1 = marginal_outputs(iso, 1);
  return BinaryCovertChannel(
    std::move(out0.bob), std::move(out1.bob), std::move(out0.willie), std::move(out1.willie), tol);
}

/// omega_alpha = (1 - alpha) omega0 + alpha omega1.
inline DensityOperator mixed_output(const BinaryCovertChannel & ch, double alpha)
{
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "mixing weight must lie in [0, 1]");
  }
  return DensityOperator::unchecked((1.0 - alpha) * ch.omega0().matrix() + alpha * ch.omega1().matrix());
}

struct ExcitationSpec
{
  double gamma;
};

struct KrausSpec
{
  Index in_dim;
  std::vector<Matrix> kraus;
};

struct CqPairSpec
{
  Matrix sigma0;
  Matrix sigma1;
  Matrix omega0;
  Matrix omega1;
};

/// Channel description as read from a spec file.
using ChannelSpec = std::variant<ExcitationSpec, KrausSpec, CqPairSpec>;

inline bool has_isometry(const ChannelSpec & spec)
{
  return !std::holds_alternative<CqPairSpec>(spec);
}

inline StinespringIsometry isometry_from_spec(const ChannelSpec & spec, const Tolerances & tol = {})
{
  if (const auto * e = std::get_if<ExcitationSpec>(&spec)) {
    return stinespring_from_kraus(excitation_channel(e->gamma), tol);
  }
  if (const auto * k = std::get_if<KrausSpec>(&spec)) {
    KrausChannel ch(k->kraus, tol);
    if (ch.in_dim() != k->in_dim) {
      throw Error(ErrorKind::DimMismatch, "declared inDim does not match the Kraus operators");
    }
    return stinespring_from_kraus(ch, tol);
  }
  throw Error(ErrorKind::InvalidParameter, "a cq-pair spec has no Stinespring isometry");
}

inline BinaryCovertChannel covert_channel_from_spec(const ChannelSpec & spec, const Tolerances & tol = {})
{
  if (const auto * cq = std::get_if<CqPairSpec>(&spec)) {
    return BinaryCovertChannel(
      DensityOperator(cq->sigma0, tol), DensityOperator(cq->sigma1, tol),
      DensityOperator(cq->omega0, tol), DensityOperator(cq->omega1, tol), tol);
  }
  return build_covert_channel(isometry_from_spec(spec, tol), tol);
}

}  // namespace covertq

#endif  // COVERTQ__CHANNELS_HPP_
