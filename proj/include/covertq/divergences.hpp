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

#ifndef COVERTQ__DIVERGENCES_HPP_
#define COVERTQ__DIVERGENCES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "covertq/operator_core.hpp"

namespace covertq
{

/// Extended real: a finite number or +infinity. Infinity is an explicit
/// state, so callers never confuse it with a large finite value.
class DivergenceValue
{
public:
  static DivergenceValue finite(double v) {return DivergenceValue(false, v);}
  static DivergenceValue infinity() {return DivergenceValue(true, 0.0);}

  bool is_finite() const {return !infinite_;}
  bool is_infinite() const {return infinite_;}

  /// Throws InvalidParameter on infinity.
  double finite_value() const
  {
    if (infinite_) {
      throw Error(ErrorKind::InvalidParameter, "divergence is infinite");
    }
    return value_;
  }

  /// IEEE view for arithmetic and printing; infinity maps to +inf.
  double to_double() const
  {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

private:
  DivergenceValue(bool inf, double v)
  : infinite_(inf), value_(v) {}

  bool infinite_;
  double value_;
};

/// Probability vector over a finite alphabet with one state per symbol.
class CqEnsemble
{
public:
  CqEnsemble(std::vector<double> probs, std::vector<DensityOperator> states, const Tolerances & tol = {})
  : probs_(std::move(probs)), states_(std::move(states))
  {
    if (probs_.empty() || probs_.size() != states_.size()) {
      throw Error(ErrorKind::DimMismatch, "ensemble needs one state per probability");
    }
    double total = 0;
    for (double p : probs_) {
      if (p < 0) {
        throw Error(ErrorKind::InvalidParameter, "negative probability in ensemble");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > tol.trace) {
      throw Error(ErrorKind::InvalidParameter, "ensemble probabilities do not sum to 1");
    }
    for (const auto & s : states_) {
      if (s.dim() != states_.front().dim()) {
        throw Error(ErrorKind::DimMismatch, "ensemble states differ in dimension");
      }
    }
  }

  const std::vector<double> & probs() const {return probs_;}
  const std::vector<DensityOperator> & states() const {return states_;}

  /// omega_p = sum_x p(x) omega_x.
  DensityOperator average() const
  {
    Matrix avg = Matrix::Zero(states_.front().dim(), states_.front().dim());
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      avg += probs_[i] * states_[i].matrix();
    }
    return DensityOperator::unchecked(std::move(avg));
  }

private:
  std::vector<double> probs_;
  std::vector<DensityOperator> states_;
};

/// Umegaki relative entropy tr[rho (log rho - log sigma)] in nats, or +inf
/// when supp(rho) is not contained in supp(sigma).
inline DivergenceValue qre(const DensityOperator & rho, const DensityOperator & sigma, const Tolerances & tol = {})
{
  require_same_dim(rho.matrix(), sigma.matrix());
  const auto er = eigh(rho.matrix(), tol);
  const auto es = eigh(sigma.matrix(), tol);
  if (!support_included(er, es, tol)) {
    return DivergenceValue::infinity();
  }
  double neg_entropy = 0;
  for (Index i = 0; i < er.values.size(); ++i) {
    const double l = er.values(i);
    if (l > 0) {
      neg_entropy += l * std::log(l);
    }
  }
  // tr[rho log sigma] evaluated in sigma's eigenbasis, support only.
  const Matrix rotated = es.vectors.adjoint() * rho.matrix() * es.vectors;
  double cross = 0;
  for (Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) > tol.support) {
      cross += rotated(i, i).real() * std::log(es.values(i));
    }
  }
  return DivergenceValue::finite(std::max(0.0, neg_entropy - cross));
}

namespace detail
{

/// (log x - log y) / (x - y), with the limit 1/x for |x - y| < cluster_tol.
inline double log_divided_difference(double x, double y, double cluster_tol)
{
  if (std::abs(x - y) < cluster_tol) {
    return 1.0 / x;
  }
  return std::log1p((x - y) / y) / (x - y);
}

}  // namespace detail

/// Quantum chi-square divergence from the spectral formula
///   sum_{i != j} (log l_i - log l_j)/(l_i - l_j) tr[(rho-sigma) P_i (rho-sigma) P_j]
///   + sum_i (1/l_i) tr[(rho-sigma) P_i (rho-sigma) P_i]
/// over the clustered spectral decomposition sigma = sum_i l_i P_i.
/// Requires sigma to be full rank.
inline DivergenceValue chi_square(const DensityOperator & rho, const DensityOperator & sigma, const Tolerances & tol = {})
{
  require_same_dim(rho.matrix(), sigma.matrix());
  const auto decomposition = spectral_decompose(sigma.matrix(), tol);
  if (decomposition.clusters.back().value <= tol.support) {
    throw Error(ErrorKind::SingularReference, "reference state is not full rank");
  }
  const Matrix u = decomposition.eigenbasis();
  const auto labels = decomposition.cluster_labels();
  const Matrix delta = u.adjoint() * (rho.matrix() - sigma.matrix()) * u;
  const std::size_t k = decomposition.clusters.size();
  // Block weights: sum_{a in i, b in j} |delta_ab|^2.
  std::vector<double> weight(k * k, 0.0);
  for (Index a = 0; a < delta.rows(); ++a) {
    for (Index b = 0; b < delta.cols(); ++b) {
      weight[labels[static_cast<std::size_t>(a)] * k + labels[static_cast<std::size_t>(b)]] +=
        std::norm(delta(a, b));
    }
  }
  double total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double li = decomposition.clusters[i].value;
      const double lj = decomposition.clusters[j].value;
      const double f = i == j ? 1.0 / li : detail::log_divided_difference(li, lj, tol.cluster);
      total += f * weight[i * k + j];
    }
  }
  return DivergenceValue::finite(std::max(0.0, total));
}

/// Classical chi-square sum (p - q)^2 / q; q must be strictly positive.
inline double chi_square_commuting(const std::vector<double> & p, const std::vector<double> & q)
{
  if (p.size() != q.size()) {
    throw Error(ErrorKind::DimMismatch, "probability vectors differ in length");
  }
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q[i] > 0)) {
      throw Error(ErrorKind::SingularReference, "reference distribution has a zero entry");
    }
    total += (p[i] - q[i]) * (p[i] - q[i]) / q[i];
  }
  return total;
}

/// Sum of the positive eigenvalues of rho - gamma * sigma, gamma >= 1.
inline double hockey_stick(
  const DensityOperator & rho, const DensityOperator & sigma, double gamma, const Tolerances & tol = {})
{
  require_same_dim(rho.matrix(), sigma.matrix());
  if (!(gamma >= 1.0)) {
    throw Error(ErrorKind::InvalidGamma, "hockey-stick parameter must be >= 1");
  }
  const auto eig = eigh(rho.matrix() - gamma * sigma.matrix(), tol);
  double total = 0;
  for (Index i = 0; i < eig.values.size(); ++i) {
    total += std::max(eig.values(i), 0.0);
  }
  return total;
}

/// Petz-Renyi divergence (1/(s-1)) log tr[rho^s sigma^(1-s)], powers taken
/// on the supports. Returns +inf when the trace vanishes, or when s > 1 and
/// supp(rho) is not inside supp(sigma). Orders s < 0 may give negative values.
inline DivergenceValue petz_renyi(
  const DensityOperator & rho, const DensityOperator & sigma, double s, const Tolerances & tol = {})
{
  require_same_dim(rho.matrix(), sigma.matrix());
  if (s == 1.0) {
    throw Error(ErrorKind::InvalidParameter, "order 1 is the relative entropy; use qre");
  }
  const auto er = eigh(rho.matrix(), tol);
  const auto es = eigh(sigma.matrix(), tol);
  if (s > 1.0 && !support_included(er, es, tol)) {
    return DivergenceValue::infinity();
  }
  const Matrix product = support_power(er, s, tol) * support_power(es, 1.0 - s, tol);
  const double q = product.trace().real();
  if (!(q > 0)) {
    return DivergenceValue::infinity();
  }
  return DivergenceValue::finite(std::log(q) / (s - 1.0));
}

/// phi(s, p) = log sum_x p(x) tr[omega_x^(1-s) omega_p^s] for s <= 0.
inline double phi(double s, const CqEnsemble & ensemble, const Tolerances & tol = {})
{
  if (s > 0) {
    throw Error(ErrorKind::InvalidParameter, "phi is defined for s <= 0");
  }
  const auto avg = eigh(ensemble.average().matrix(), tol);
  const Matrix avg_power = support_power(avg, s, tol);
  double total = 0;
  for (std::size_t x = 0; x < ensemble.probs().size(); ++x) {
    if (ensemble.probs()[x] == 0) {
      continue;
    }
    const auto ex = eigh(ensemble.states()[x].matrix(), tol);
    total += ensemble.probs()[x] * (support_power(ex, 1.0 - s, tol) * avg_power).trace().real();
  }
  return std::log(total);
}

/// Minimal average error of discriminating two equiprobable states.
inline double helstrom_error(const DensityOperator & rho, const DensityOperator & sigma, const Tolerances & tol = {})
{
  require_same_dim(rho.matrix(), sigma.matrix());
  return std::clamp(0.5 * (1.0 - 0.5 * trace_norm(rho.matrix() - sigma.matrix(), tol)), 0.0, 0.5);
}

struct PinskerCheck
{
  double lhs;
  double rhs;
  bool holds;
};

/// (1/2)||rho - sigma||_1 against sqrt(D(rho||sigma) / 2).
inline PinskerCheck pinsker_check(const DensityOperator & rho, const DensityOperator & sigma, const Tolerances & tol = {})
{
  const double lhs = 0.5 * trace_norm(rho.matrix() - sigma.matrix(), tol);
  const auto d = qre(rho, sigma, tol);
  if (d.is_infinite()) {
    throw Error(ErrorKind::InvalidParameter, "Pinsker check needs a finite relative entropy");
  }
  const double rhs = std::sqrt(0.5 * d.finite_value());
  return {lhs, rhs, lhs <= rhs + 1e-12};
}

/// Distinct eigenvalues of a density operator, clustered per tol.cluster.
inline std::vector<double> distinct_eigenvalues(const DensityOperator & omega, const Tolerances & tol = {})
{
  std::vector<double> out;
  for (const auto & c : spectral_decompose(omega.matrix(), tol).clusters) {
    out.push_back(c.value);
  }
  return out;
}

/// Calls visit(counts) for every way to split n letters over k symbols.
template<typename Visit>
void for_each_type(int n, std::size_t k, Visit && visit)
{
  std::vector<int> counts(k, 0);
  auto rec = [&](auto && self, std::size_t pos, int remaining) -> void {
      if (pos + 1 == k) {
        counts[pos] = remaining;
        visit(counts);
        return;
      }
      for (int c = remaining; c >= 0; --c) {
        counts[pos] = c;
        self(self, pos + 1, remaining - c);
      }
    };
  if (k == 0) {
    return;
  }
  rec(rec, 0, n);
}

/// Number of distinct eigenvalues of omega^{(x) n}. Products are compared in
/// the log domain, so `tol.cluster` acts as a relative tolerance; a zero
/// product counts as one value. Never exceeds (n+1)^dim.
inline std::size_t distinct_eigenvalue_count(const DensityOperator & omega, int n, const Tolerances & tol = {})
{
  if (n < 1) {
    throw Error(ErrorKind::InvalidParameter, "blocklength must be positive");
  }
  const auto values = distinct_eigenvalues(omega, tol);
  std::vector<double> logs;
  bool has_zero = false;
  for_each_type(
    n, values.size(), [&](const std::vector<int> & counts) {
      double lp = 0;
      for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) {
          continue;
        }
        if (values[i] <= tol.support) {
          has_zero = true;
          return;
        }
        lp += counts[i] * std::log(values[i]);
      }
      logs.push_back(lp);
    });
  std::sort(logs.begin(), logs.end());
  std::size_t count = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (i == 0 || logs[i] - logs[i - 1] >= tol.cluster) {
      ++count;
    }
  }
  return count + (has_zero ? 1 : 0);
}

}  // namespace covertq

#endif  // COVERTQ__DIVERGENCES_HPP_
