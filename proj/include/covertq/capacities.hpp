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

#ifndef COVERTQ__CAPACITIES_HPP_
#define COVERTQ__CAPACITIES_HPP_

#include <algorithm>
#include <cmath>

#include "covertq/channels.hpp"
#include "covertq/divergences.hpp"

// All rates are in nats per sqrt(n * delta), the square-root-law scaling.
namespace covertq
{

/// The three divergences every capacity formula is built from.
struct CovertDivergences
{
  double d_bob;       // D(sigma1 || sigma0)
  double d_willie;    // D(omega1 || omega0)
  double chi2_willie; // chi^2(omega1 || omega0)

  /// sqrt(chi^2 / 2), the covertness normalization.
  double denominator() const {return std::sqrt(0.5 * chi2_willie);}
};

inline CovertDivergences covert_divergences(const BinaryCovertChannel & ch, const Tolerances & tol = {})
{
  const auto d_bob = qre(ch.sigma1(), ch.sigma0(), tol);
  const auto d_willie = qre(ch.omega1(), ch.omega0(), tol);
  if (d_bob.is_infinite() || d_willie.is_infinite()) {
    throw Error(ErrorKind::AssumptionViolation, "relative entropy is infinite; support inclusion fails");
  }
  // chi^2 only needs omega0 invertible on its own support; restrict to it.
  const auto w0 = eigh(ch.omega0().matrix(), tol);
  Index rank = 0;
  while (rank < w0.values.size() && w0.values(rank) > tol.support) {
    ++rank;
  }
  const Matrix basis = w0.vectors.leftCols(rank);
  const auto restrict = [&](const DensityOperator & d) {
      return DensityOperator::unchecked(basis.adjoint() * d.matrix() * basis);
    };
  const double chi2 = chi_square(restrict(ch.omega1()), restrict(ch.omega0()), tol).finite_value();
  if (!(chi2 > 0)) {
    throw Error(ErrorKind::SingularReference, "chi-square divergence of the warden's outputs is zero");
  }
  return {d_bob.finite_value(), d_willie.finite_value(), chi2};
}

/// D(sigma1||sigma0) / sqrt(chi^2(omega1||omega0) / 2).
inline double covert_secrecy_capacity_keyed(const BinaryCovertChannel & ch, const Tolerances & tol = {})
{
  const auto d = covert_divergences(ch, tol);
  return d.d_bob / d.denominator();
}

/// [D(sigma1||sigma0) - D(omega1||omega0)]_+ / sqrt(chi^2 / 2).
inline double covert_secrecy_capacity_unassisted(const BinaryCovertChannel & ch, const Tolerances & tol = {})
{
  const auto d = covert_divergences(ch, tol);
  return std::max(0.0, d.d_bob - d.d_willie) / d.denominator();
}

/// Same formula as the unassisted secrecy capacity on the induced pair.
inline double covert_eg_capacity(const StinespringIsometry & iso, const Tolerances & tol = {})
{
  return covert_secrecy_capacity_unassisted(build_covert_channel(iso, tol), tol);
}

/// Asymptotic key rate D(omega1||omega0) / sqrt(chi^2 / 2).
inline double minimal_key_rate(const BinaryCovertChannel & ch, const Tolerances & tol = {})
{
  const auto d = covert_divergences(ch, tol);
  return d.d_willie / d.denominator();
}

/// [D(omega1||omega0) - D(sigma1||sigma0)]_+ / sqrt(chi^2 / 2).
inline double key_rate_without_secrecy(const BinaryCovertChannel & ch, const Tolerances & tol = {})
{
  const auto d = covert_divergences(ch, tol);
  return std::max(0.0, d.d_willie - d.d_bob) / d.denominator();
}

/// log((1-g)/g) sqrt(2(1-g)/g) for g < 1/2, zero otherwise.
inline double excitation_capacity_closed_form(double gamma)
{
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "excitation probability must lie in (0, 1]");
  }
  if (gamma >= 0.5) {
    return 0.0;
  }
  return std::log((1.0 - gamma) / gamma) * std::sqrt(2.0 * (1.0 - gamma) / gamma);
}

struct CapacityReport
{
  double d_bob;
  double d_willie;
  double chi2_willie;
  double denom;
  double c_s_key;
  double c_s;
  double c_eg;
  double l_key_min;
  double l_key_no_secrecy;
  bool anti_degraded;
};

inline CapacityReport capacity_report(const BinaryCovertChannel & ch, const Tolerances & tol = {})
{
  const auto d = covert_divergences(ch, tol);
  CapacityReport r{};
  r.d_bob = d.d_bob;
  r.d_willie = d.d_willie;
  r.chi2_willie = d.chi2_willie;
  r.denom = d.denominator();
  r.c_s_key = d.d_bob / r.denom;
  r.c_s = std::max(0.0, d.d_bob - d.d_willie) / r.denom;
  r.c_eg = r.c_s;
  r.l_key_min = d.d_willie / r.denom;
  r.l_key_no_secrecy = std::max(0.0, d.d_willie - d.d_bob) / r.denom;
  r.anti_degraded = d.d_bob <= d.d_willie;
  return r;
}

inline CapacityReport capacity_report(const StinespringIsometry & iso, const Tolerances & tol = {})
{
  return capacity_report(build_covert_channel(iso, tol), tol);
}

}  // namespace covertq

#endif  // COVERTQ__CAPACITIES_HPP_
