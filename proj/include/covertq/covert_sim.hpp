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

#ifndef COVERTQ__COVERT_SIM_HPP_
#define COVERTQ__COVERT_SIM_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covertq/capacities.hpp"
#include "covertq/channels.hpp"
#include "covertq/divergences.hpp"
#include "covertq/error.hpp"
#include "covertq/operator_core.hpp"
#include "covertq/rng.hpp"

namespace covertq
{

/// Binary codeword; every entry is 0 or 1.
using Word = std::vector<std::uint8_t>;

/// Codewords indexed by (m, l), stored row-major as m * l_size + l.
class Codebook
{
public:
  Codebook(int n, int m_size, int l_size, std::vector<Word> words)
  : n_(n), m_size_(m_size), l_size_(l_size), words_(std::move(words))
  {
    if (n < 1 || m_size < 1 || l_size < 1) {
      throw Error(ErrorKind::InvalidParameter, "codebook needs n, |M|, |L| >= 1");
    }
    if (words_.size() != static_cast<std::size_t>(m_size) * static_cast<std::size_t>(l_size)) {
      throw Error(ErrorKind::DimMismatch, "codebook holds the wrong number of words");
    }
    for (const auto & w : words_) {
      if (w.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorKind::DimMismatch, "codeword length differs from n");
      }
      for (auto bit : w) {
        if (bit > 1) {
          throw Error(ErrorKind::InvalidParameter, "codeword entries must be 0 or 1");
        }
      }
    }
  }

  int n() const {return n_;}
  int m_size() const {return m_size_;}
  int l_size() const {return l_size_;}
  std::size_t size() const {return words_.size();}
  const std::vector<Word> & words() const {return words_;}

  std::size_t index(int m, int l) const
  {
    if (m < 0 || m >= m_size_ || l < 0 || l >= l_size_) {
      throw Error(ErrorKind::IndexOutOfRange, "codeword index out of range");
    }
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(l_size_) +
           static_cast<std::size_t>(l);
  }

  const Word & word(int m, int l) const {return words_[index(m, l)];}

private:
  int n_;
  int m_size_;
  int l_size_;
  std::vector<Word> words_;
};

/// How warden-side states are evaluated.
///
/// Dense builds (dim omega0)^n matrices. Commuting requires [omega0, omega1]
/// = 0 and works with probability vectors in the shared eigenbasis; above
/// max_classical_dim it switches to Monte Carlo estimates.
enum class ComputePath { Dense, Commuting };

inline constexpr std::size_t kDefaultMaxDenseDim = 4096;

struct SimConfig
{
  int n = 8;
  double gamma = 0.7071;
  int m_size = 16;
  int l_size = 16;
  std::uint64_t seed = 42;
  int samples = 50;
  std::vector<double> s_grid{-1.0, -0.5, -0.25, -0.1, -0.05};
  /// Empty means 21 log-spaced points around alpha * n * D(omega1 || omega0).
  std::vector<double> beta_grid{};
  /// Empty means the default a = alpha * n * D(sigma1 || sigma0) / 2.
  std::optional<double> a_threshold{};
  std::size_t max_dense_dim = kDefaultMaxDenseDim;
  std::size_t max_classical_dim = std::size_t{1} << 22;
  std::size_t mc_samples = 4000;
  std::size_t max_decoder_codewords = 64;
  ComputePath path = ComputePath::Dense;

  double alpha() const {return gamma / std::sqrt(static_cast<double>(n));}

  void validate() const
  {
    if (n < 1 || m_size < 1 || l_size < 1 || samples < 1) {
      throw Error(ErrorKind::InvalidParameter, "n, |M|, |L| and samples must be positive");
    }
    const double a = alpha();
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "alpha = gamma / sqrt(n) must lie in [0, 1]");
    }
    if (s_grid.empty()) {
      throw Error(ErrorKind::InvalidParameter, "s grid is empty");
    }
    for (double s : s_grid) {
      if (!(s <= 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "s grid entries must be <= 0");
      }
    }
    for (double b : beta_grid) {
      if (!std::isfinite(b)) {
        throw Error(ErrorKind::InvalidParameter, "beta grid entries must be finite");
      }
    }
    if (mc_samples < 2) {
      throw Error(ErrorKind::InvalidParameter, "Monte Carlo needs at least two samples");
    }
  }
};

/// i.i.d. Bernoulli(alpha) codebook. Bit i of word (m, l) is
/// [u(seed; sample, m, l, i) < alpha] with u from CounterRng.
inline Codebook sample_codebook(
  int n, int m_size, int l_size, double alpha, std::uint64_t seed, std::uint64_t sample_index = 0)
{
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "alpha must lie in [0, 1]");
  }
  if (n < 1 || m_size < 1 || l_size < 1) {
    throw Error(ErrorKind::InvalidParameter, "codebook needs n, |M|, |L| >= 1");
  }
  const CounterRng rng(seed);
  std::vector<Word> words;
  words.reserve(static_cast<std::size_t>(m_size) * static_cast<std::size_t>(l_size));
  for (int m = 0; m < m_size; ++m) {
    for (int l = 0; l < l_size; ++l) {
      Word w(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform(
          {sample_index, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(l),
            static_cast<std::uint64_t>(i)});
        w[static_cast<std::size_t>(i)] = u < alpha ? 1 : 0;
      }
      words.push_back(std::move(w));
    }
  }
  return Codebook(n, m_size, l_size, std::move(words));
}

inline Codebook sample_codebook(const SimConfig & cfg, std::uint64_t sample_index = 0)
{
  cfg.validate();
  return sample_codebook(cfg.n, cfg.m_size, cfg.l_size, cfg.alpha(), cfg.seed, sample_index);
}

/// Word at (m, (m2 + k) mod |L|): the key masks the in-bin index.
inline const Word & otp_encode(int m, int m2, int k, const Codebook & cb)
{
  if (k < 0 || k >= cb.l_size() || m2 < 0 || m2 >= cb.l_size()) {
    throw Error(ErrorKind::IndexOutOfRange, "key or in-bin index out of range");
  }
  return cb.word(m, (m2 + k) % cb.l_size());
}

/// Dense product state of a word, letters[x] at each position.
inline Matrix product_state(const Word & w, const Matrix & letter0, const Matrix & letter1)
{
  Matrix out = Matrix::Ones(1, 1);
  for (auto bit : w) {
    out = tensor(out, bit ? letter1 : letter0);
  }
  return out;
}

namespace detail
{

inline std::size_t checked_power(Index base, int n, std::size_t cap)
{
  std::size_t dim = 1;
  for (int i = 0; i < n; ++i) {
    if (dim > cap / static_cast<std::size_t>(base)) {
      return std::numeric_limits<std::size_t>::max();
    }
    dim *= static_cast<std::size_t>(base);
  }
  return dim;
}

inline void require_dense_budget(Index base, int n, std::size_t cap, const char * what)
{
  const std::size_t dim = checked_power(base, n, cap);
  if (dim > cap) {
    throw Error(
      ErrorKind::BudgetExceeded,
      std::string(what) + ": dimension " + std::to_string(base) + "^" + std::to_string(n) +
      " exceeds the dense budget " + std::to_string(cap));
  }
}

// out += a (x) b, skipping zero entries of a.
inline void add_tensor(Matrix & out, const Matrix & a, const Matrix & b)
{
  const Index r = b.rows();
  const Index c = b.cols();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != Complex(0.0, 0.0)) {
        out.block(i * r, j * c, r, c) += a(i, j) * b;
      }
    }
  }
}

// Unnormalized sum over words of the product of letters from position depth
// on. Words are split on their leading bit and the 0-branch is added before
// the 1-branch, so the summation order depends only on the word set.
inline Matrix product_sum(
  const std::vector<const Word *> & words, std::size_t depth, const std::array<const Matrix *, 2> & letters)
{
  const std::size_t n = words.front()->size();
  if (depth == n) {
    return Matrix::Constant(1, 1, Complex(static_cast<double>(words.size()), 0.0));
  }
  std::array<std::vector<const Word *>, 2> split;
  for (const Word * w : words) {
    split[(*w)[depth]].push_back(w);
  }
  const Index d = letters[0]->rows();
  Index tail = 1;
  for (std::size_t i = depth + 1; i < n; ++i) {
    tail *= d;
  }
  Matrix out = Matrix::Zero(d * tail, d * tail);
  for (int x = 0; x < 2; ++x) {
    if (!split[x].empty()) {
      add_tensor(out, *letters[x], product_sum(split[x], depth + 1, letters));
    }
  }
  return out;
}

inline RealVector kron(const RealVector & a, const RealVector & b)
{
  RealVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

inline RealVector kron_power(const RealVector & a, int n)
{
  RealVector out = RealVector::Ones(1);
  for (int i = 0; i < n; ++i) {
    out = kron(out, a);
  }
  return out;
}

// Classical counterpart of product_sum, same summation order.
inline RealVector product_sum_classical(
  const std::vector<const Word *> & words, std::size_t depth, const std::array<const RealVector *, 2> & letters)
{
  const std::size_t n = words.front()->size();
  if (depth == n) {
    return RealVector::Constant(1, static_cast<double>(words.size()));
  }
  std::array<std::vector<const Word *>, 2> split;
  for (const Word * w : words) {
    split[(*w)[depth]].push_back(w);
  }
  const Index d = letters[0]->size();
  Index tail = 1;
  for (std::size_t i = depth + 1; i < n; ++i) {
    tail *= d;
  }
  RealVector out = RealVector::Zero(d * tail);
  for (int x = 0; x < 2; ++x) {
    if (!split[x].empty()) {
      const RealVector rest = product_sum_classical(split[x], depth + 1, letters);
      for (Index i = 0; i < d; ++i) {
        if ((*letters[x])(i) != 0.0) {
          out.segment(i * tail, tail) += (*letters[x])(i) * rest;
        }
      }
    }
  }
  return out;
}

inline std::vector<const Word *> word_pointers(const Codebook & cb, int m_first, int m_last)
{
  std::vector<const Word *> out;
  for (int m = m_first; m < m_last; ++m) {
    for (int l = 0; l < cb.l_size(); ++l) {
      out.push_back(&cb.word(m, l));
    }
  }
  return out;
}

inline double classical_l1(const RealVector & p, const RealVector & q)
{
  return (p - q).cwiseAbs().sum();
}

inline DivergenceValue classical_kl(const RealVector & p, const RealVector & q)
{
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) {
      continue;
    }
    if (q(i) <= 0.0) {
      return DivergenceValue::infinity();
    }
    acc += p(i) * std::log(p(i) / q(i));
  }
  return DivergenceValue::finite(std::max(acc, 0.0));
}

}  // namespace detail

/// Shared eigenbasis of two commuting Hermitian operators: a = U diag(w0) U^dagger,
/// b = U diag(w1) U^dagger.
struct CommonEigenbasis
{
  Matrix basis;
  RealVector w0;
  RealVector w1;
  bool identity_basis = false;
};

/// Returns nothing when the operators do not commute within tol.herm.
inline std::optional<CommonEigenbasis> common_eigenbasis(
  const Matrix & a, const Matrix & b, const Tolerances & tol = {})
{
  require_same_dim(a, b);
  if (max_abs(a * b - b * a) > tol.herm) {
    return std::nullopt;
  }
  const Index d = a.rows();
  const auto off_diagonal = [d](const Matrix & m) {
      double worst = 0.0;
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
          if (i != j) {
            worst = std::max(worst, std::abs(m(i, j)));
          }
        }
      }
      return worst;
    };
  CommonEigenbasis out;
  if (off_diagonal(a) <= tol.herm && off_diagonal(b) <= tol.herm) {
    out.basis = Matrix::Identity(d, d);
    out.identity_basis = true;
  } else {
    // A generic combination separates joint eigenspaces; the check below
    // catches accidental coincidences.
    out.basis = eigh(a + 0.6180339887498949 * b, tol).vectors;
  }
  const Matrix ra = out.basis.adjoint() * a * out.basis;
  const Matrix rb = out.basis.adjoint() * b * out.basis;
  if (off_diagonal(ra) > 10 * tol.herm || off_diagonal(rb) > 10 * tol.herm) {
    return std::nullopt;
  }
  out.w0 = ra.diagonal().real().cwiseMax(0.0);
  out.w1 = rb.diagonal().real().cwiseMax(0.0);
  return out;
}

namespace detail
{

inline CommonEigenbasis require_commuting(const BinaryCovertChannel & ch, const Tolerances & tol)
{
  auto basis = common_eigenbasis(ch.omega0().matrix(), ch.omega1().matrix(), tol);
  if (!basis) {
    throw Error(
      ErrorKind::InvalidParameter, "commuting fast path requested but omega0 and omega1 do not commute");
  }
  return *basis;
}

// U^{(x)n} diag(p) U^{(x)n dagger}.
inline Matrix lift_diagonal(const RealVector & p, const CommonEigenbasis & basis, int n)
{
  Matrix diag = p.cast<Complex>().asDiagonal();
  if (basis.identity_basis) {
    return diag;
  }
  const Matrix u = tensor_power(basis.basis, n);
  return u * diag * u.adjoint();
}

}  // namespace detail

/// Average over words (m, l) with m in [m_first, m_last) of the warden's
/// product states, as a probability vector in the shared eigenbasis.
inline RealVector willie_distribution(
  const Codebook & cb, const CommonEigenbasis & basis, int m_first, int m_last,
  std::size_t max_dim = std::size_t{1} << 22)
{
  detail::require_dense_budget(basis.w0.size(), cb.n(), max_dim, "classical warden distribution");
  const auto words = detail::word_pointers(cb, m_first, m_last);
  const RealVector sum = detail::product_sum_classical(words, 0, {&basis.w0, &basis.w1});
  return sum / static_cast<double>(words.size());
}

namespace detail
{

inline Matrix willie_dense(
  const Codebook & cb, const BinaryCovertChannel & ch, int m_first, int m_last, ComputePath path,
  std::size_t max_dim, const Tolerances & tol)
{
  detail::require_dense_budget(ch.omega0().dim(), cb.n(), max_dim, "warden state");
  if (path == ComputePath::Commuting) {
    const auto basis = require_commuting(ch, tol);
    return lift_diagonal(willie_distribution(cb, basis, m_first, m_last, max_dim), basis, cb.n());
  }
  const auto words = word_pointers(cb, m_first, m_last);
  const Matrix sum = product_sum(words, 0, {&ch.omega0().matrix(), &ch.omega1().matrix()});
  return sum / static_cast<double>(words.size());
}

}  // namespace detail

/// rho_bar = (1/(|M||L|)) sum_{m,l} (x)_i omega_{c_i(m,l)}.
inline DensityOperator willie_average_state(
  const Codebook & cb, const BinaryCovertChannel & ch, ComputePath path = ComputePath::Dense,
  std::size_t max_dim = kDefaultMaxDenseDim, const Tolerances & tol = {})
{
  return DensityOperator::unchecked(detail::willie_dense(cb, ch, 0, cb.m_size(), path, max_dim, tol));
}

/// rho^(m) = (1/|L|) sum_l (x)_i omega_{c_i(m,l)}.
inline DensityOperator willie_bin_state(
  const Codebook & cb, const BinaryCovertChannel & ch, int m, ComputePath path = ComputePath::Dense,
  std::size_t max_dim = kDefaultMaxDenseDim, const Tolerances & tol = {})
{
  if (m < 0 || m >= cb.m_size()) {
    throw Error(ErrorKind::IndexOutOfRange, "bin index out of range");
  }
  return DensityOperator::unchecked(detail::willie_dense(cb, ch, m, m + 1, path, max_dim, tol));
}

/// Minimizer of the resolvability bound over the (s, beta) grid.
struct ResolvabilityBound
{
  double value = 0.0;
  double s = 0.0;
  double beta = 0.0;
  std::size_t nu = 0;
};

/// Default beta grid: 21 log-spaced points over [b0/100, 100 b0] with
/// b0 = alpha n D(omega1 || omega0), or b0 = 1 when that vanishes.
inline std::vector<double> default_beta_grid(const BinaryCovertChannel & ch, int n, double alpha, const Tolerances & tol = {})
{
  double b0 = alpha * n * qre(ch.omega1(), ch.omega0(), tol).to_double();
  if (!(b0 > 0.0) || !std::isfinite(b0)) {
    b0 = 1.0;
  }
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) {
    grid.push_back(b0 * std::pow(10.0, -2.0 + 0.2 * i));
  }
  return grid;
}

/// min over (s, beta) of 2 sqrt(exp(beta s + n phi(s, alpha))) + sqrt(e^beta nu / K),
/// where nu counts distinct eigenvalues of omega_alpha^(x)n. Besides the
/// grid, each s also tries the stationary point of the bound in beta.
inline ResolvabilityBound resolvability_rhs(
  const BinaryCovertChannel & ch, int n, double alpha, double codebook_size,
  const std::vector<double> & s_grid, std::vector<double> beta_grid, const Tolerances & tol = {})
{
  if (!(codebook_size >= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "codebook size must be >= 1");
  }
  const DensityOperator omega_alpha = mixed_output(ch, alpha);
  const CqEnsemble ensemble({1.0 - alpha, alpha}, {ch.omega0(), ch.omega1()}, tol);
  if (beta_grid.empty()) {
    beta_grid = default_beta_grid(ch, n, alpha, tol);
  }
  ResolvabilityBound best;
  best.value = std::numeric_limits<double>::infinity();
  best.nu = distinct_eigenvalue_count(omega_alpha, n, tol);
  const double log_ratio = std::log(static_cast<double>(best.nu)) - std::log(codebook_size);
  for (double s : s_grid) {
    const double n_phi = n * phi(s, ensemble, tol);
    const auto evaluate = [&](double beta) {
        const double v = 2.0 * std::exp(0.5 * (beta * s + n_phi)) + std::exp(0.5 * (beta + log_ratio));
        if (v < best.value) {
          best.value = v;
          best.s = s;
          best.beta = beta;
        }
      };
    for (double beta : beta_grid) {
      evaluate(beta);
    }
    if (s < 0.0) {
      // d/dbeta = 0  <=>  e^{beta (s - 1) / 2} = sqrt(nu / K) e^{-n phi / 2} / (-2 s).
      const double beta_star = (log_ratio - n_phi - 2.0 * std::log(-2.0 * s)) / (s - 1.0);
      if (std::isfinite(beta_star)) {
        evaluate(beta_star);
      }
    }
  }
  return best;
}

struct CovertnessReport
{
  double d_covert = 0.0;
  double d_reference = 0.0;
  double trace_dist_to_mixed = 0.0;
  double helstrom_error = 0.5;
  double pinsker_lower_bound = 0.5;
  double resolvability_rhs = 0.0;
  /// "dense", "commuting-exact" or "commuting-monte-carlo".
  std::string method;
  /// Standard errors of the Monte Carlo estimates; zero for exact methods.
  double d_covert_std_err = 0.0;
  double trace_dist_std_err = 0.0;
  double helstrom_std_err = 0.0;
};

struct SecrecyReport
{
  std::vector<double> per_bin_distances;
  double average_leakage = 0.0;
  std::vector<double> per_bin_std_err;
};

namespace detail
{

struct MonteCarloDistances
{
  double kl_to_innocent = 0.0;
  double kl_std_err = 0.0;
  double l1_to_innocent = 0.0;
  double l1_innocent_std_err = 0.0;
  double l1_to_mixed = 0.0;
  double l1_mixed_std_err = 0.0;
};

inline double log_or_neg_inf(double x)
{
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

// Draws y from P = (1/K) sum_k prod_i w_{c_i(k)}(y_i) and averages
//   log P(y) - log Q0(y),  2 (1 - Q0(y)/P(y))_+,  2 (1 - Qa(y)/P(y))_+.
// The positive-part form of the l1 distance has no blind spot where P = 0.
inline MonteCarloDistances monte_carlo_distances(
  const std::vector<const Word *> & words, const CommonEigenbasis & basis, double alpha,
  std::uint64_t seed, std::uint64_t stream, std::size_t samples)
{
  const Index d = basis.w0.size();
  const RealVector wa = (1.0 - alpha) * basis.w0 + alpha * basis.w1;
  std::array<std::vector<double>, 2> log_w;
  std::vector<double> log_wa(static_cast<std::size_t>(d)), log_w0(static_cast<std::size_t>(d));
  for (Index y = 0; y < d; ++y) {
    log_w[0].push_back(log_or_neg_inf(basis.w0(y)));
    log_w[1].push_back(log_or_neg_inf(basis.w1(y)));
    log_wa[static_cast<std::size_t>(y)] = log_or_neg_inf(wa(y));
    log_w0[static_cast<std::size_t>(y)] = log_w[0].back();
  }
  const std::size_t k_count = words.size();
  const std::size_t n = words.front()->size();
  const CounterRng rng(seed);
  std::vector<std::size_t> y(n);
  std::vector<double> terms(k_count);
  double s_kl = 0, s2_kl = 0, s_l0 = 0, s2_l0 = 0, s_la = 0, s2_la = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    const auto k = std::min(
      k_count - 1, static_cast<std::size_t>(rng.uniform({stream, t, 0}) * static_cast<double>(k_count)));
    const Word & w = *words[k];
    for (std::size_t i = 0; i < n; ++i) {
      const RealVector & probs = w[i] ? basis.w1 : basis.w0;
      double u = rng.uniform({stream, t, 1, i});
      std::size_t pick = static_cast<std::size_t>(d - 1);
      for (Index c = 0; c < d; ++c) {
        u -= probs(c);
        if (u < 0.0 && probs(c) > 0.0) {
          pick = static_cast<std::size_t>(c);
          break;
        }
      }
      while (probs(static_cast<Index>(pick)) <= 0.0 && pick > 0) {
        --pick;
      }
      y[i] = pick;
    }
    double q0 = 0.0;
    double qa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      q0 += log_w0[y[i]];
      qa += log_wa[y[i]];
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t kk = 0; kk < k_count; ++kk) {
      double acc = 0.0;
      const Word & wk = *words[kk];
      for (std::size_t i = 0; i < n && acc > -std::numeric_limits<double>::infinity(); ++i) {
        acc += log_w[wk[i]][y[i]];
      }
      terms[kk] = acc;
      top = std::max(top, acc);
    }
    double sum = 0.0;
    for (double v : terms) {
      sum += std::exp(v - top);
    }
    const double log_p = top + std::log(sum / static_cast<double>(k_count));
    const double kl = log_p - q0;
    const double l0 = 2.0 * std::max(0.0, 1.0 - std::exp(q0 - log_p));
    const double la = 2.0 * std::max(0.0, 1.0 - std::exp(qa - log_p));
    s_kl += kl;
    s2_kl += kl * kl;
    s_l0 += l0;
    s2_l0 += l0 * l0;
    s_la += la;
    s2_la += la * la;
  }
  const double inv = 1.0 / static_cast<double>(samples);
  const auto std_err = [&](double s1, double s2) {
      const double mean = s1 * inv;
      const double var = std::max(0.0, s2 * inv - mean * mean) * samples / (samples - 1.0);
      return std::sqrt(var * inv);
    };
  MonteCarloDistances out;
  out.kl_to_innocent = s_kl * inv;
  out.kl_std_err = std_err(s_kl, s2_kl);
  out.l1_to_innocent = s_l0 * inv;
  out.l1_innocent_std_err = std_err(s_l0, s2_l0);
  out.l1_to_mixed = s_la * inv;
  out.l1_mixed_std_err = std_err(s_la, s2_la);
  return out;
}

// Stream identifiers keep Monte Carlo draws disjoint from codebook draws.
inline constexpr std::uint64_t kCovertnessStream = 0x436f76657274ULL;
inline constexpr std::uint64_t kSecrecyStream = 0x5365637265ULL;

inline bool use_monte_carlo(const Codebook & cb, const BinaryCovertChannel & ch, const SimConfig & cfg)
{
  return cfg.path == ComputePath::Commuting &&
         checked_power(ch.omega0().dim(), cb.n(), cfg.max_classical_dim) > cfg.max_classical_dim;
}

}  // namespace detail

/// Covertness metrics of a codebook. Dense and exact-commuting paths
/// evaluate rho_bar exactly; beyond max_classical_dim the commuting path
/// estimates d_covert, the trace distance and the Helstrom error by Monte
/// Carlo and reports standard errors.
inline CovertnessReport covertness_report(
  const Codebook & cb, const BinaryCovertChannel & ch, const SimConfig & cfg, const Tolerances & tol = {})
{
  cfg.validate();
  const double alpha = cfg.alpha();
  const int n = cb.n();
  CovertnessReport r;
  r.d_reference = n * qre(mixed_output(ch, alpha), ch.omega0(), tol).to_double();
  r.resolvability_rhs = resolvability_rhs(
    ch, n, alpha, static_cast<double>(cb.size()), cfg.s_grid, cfg.beta_grid, tol).value;

  if (cfg.path == ComputePath::Commuting) {
    const auto basis = detail::require_commuting(ch, tol);
    if (detail::use_monte_carlo(cb, ch, cfg)) {
      const auto mc = detail::monte_carlo_distances(
        detail::word_pointers(cb, 0, cb.m_size()), basis, alpha, cfg.seed,
        detail::kCovertnessStream, cfg.mc_samples);
      r.method = "commuting-monte-carlo";
      r.d_covert = std::max(0.0, mc.kl_to_innocent);
      r.d_covert_std_err = mc.kl_std_err;
      r.trace_dist_to_mixed = mc.l1_to_mixed;
      r.trace_dist_std_err = mc.l1_mixed_std_err;
      r.helstrom_error = 0.5 * (1.0 - 0.5 * mc.l1_to_innocent);
      r.helstrom_std_err = 0.25 * mc.l1_innocent_std_err;
    } else {
      const RealVector p = willie_distribution(cb, basis, 0, cb.m_size(), cfg.max_classical_dim);
      const RealVector q0 = detail::kron_power(basis.w0, n);
      const RealVector qa = detail::kron_power((1.0 - alpha) * basis.w0 + alpha * basis.w1, n);
      r.method = "commuting-exact";
      r.d_covert = detail::classical_kl(p, q0).to_double();
      r.trace_dist_to_mixed = detail::classical_l1(p, qa);
      r.helstrom_error = 0.5 * (1.0 - 0.5 * detail::classical_l1(p, q0));
    }
  } else {
    const DensityOperator rho = willie_average_state(cb, ch, ComputePath::Dense, cfg.max_dense_dim, tol);
    const DensityOperator w0n = tensor_power(ch.omega0(), n);
    const Matrix wan = tensor_power(mixed_output(ch, alpha).matrix(), n);
    r.method = "dense";
    r.d_covert = qre(rho, w0n, tol).to_double();
    r.trace_dist_to_mixed = trace_norm(rho.matrix() - wan, tol);
    r.helstrom_error = helstrom_error(rho, w0n, tol);
  }
  r.pinsker_lower_bound = 0.5 * (1.0 - std::sqrt(0.5 * r.d_covert));
  return r;
}

/// Per-bin trace distance ||rho^(m) - omega_alpha^(x)n||_1.
inline SecrecyReport secrecy_report(
  const Codebook & cb, const BinaryCovertChannel & ch, const SimConfig & cfg, const Tolerances & tol = {})
{
  cfg.validate();
  const double alpha = cfg.alpha();
  const int n = cb.n();
  SecrecyReport r;
  if (cfg.path == ComputePath::Commuting) {
    const auto basis = detail::require_commuting(ch, tol);
    const bool mc = detail::use_monte_carlo(cb, ch, cfg);
    RealVector qa;
    if (!mc) {
      qa = detail::kron_power((1.0 - alpha) * basis.w0 + alpha * basis.w1, n);
    }
    for (int m = 0; m < cb.m_size(); ++m) {
      if (mc) {
        const auto est = detail::monte_carlo_distances(
          detail::word_pointers(cb, m, m + 1), basis, alpha, cfg.seed,
          detail::kSecrecyStream + static_cast<std::uint64_t>(m), cfg.mc_samples);
        r.per_bin_distances.push_back(est.l1_to_mixed);
        r.per_bin_std_err.push_back(est.l1_mixed_std_err);
      } else {
        r.per_bin_distances.push_back(
          detail::classical_l1(willie_distribution(cb, basis, m, m + 1, cfg.max_classical_dim), qa));
        r.per_bin_std_err.push_back(0.0);
      }
    }
  } else {
    detail::require_dense_budget(ch.omega0().dim(), n, cfg.max_dense_dim, "warden state");
    const Matrix wan = tensor_power(mixed_output(ch, alpha).matrix(), n);
    for (int m = 0; m < cb.m_size(); ++m) {
      const Matrix bin = detail::willie_dense(cb, ch, m, m + 1, ComputePath::Dense, cfg.max_dense_dim, tol);
      r.per_bin_distances.push_back(trace_norm(bin - wan, tol));
      r.per_bin_std_err.push_back(0.0);
    }
  }
  double total = 0.0;
  for (double v : r.per_bin_distances) {
    total += v;
  }
  r.average_leakage = total / static_cast<double>(r.per_bin_distances.size());
  return r;
}

struct ResolvabilityResult
{
  double empirical_mean_distance = 0.0;
  double std_error = 0.0;
  double rhs = 0.0;
  bool holds = false;
  int samples = 0;
  std::size_t codebook_size = 0;
  ResolvabilityBound bound;
  std::vector<double> distances;
};

/// Mean of ||(1/K) sum_k omega_{c(k)} - omega_alpha^(x)n||_1 over cfg.samples
/// codebooks of size K = |M||L| (sample indices 0, 1, ...), against the
/// grid-minimized bound. holds <=> mean <= rhs + 3 standard errors.
inline ResolvabilityResult resolvability_experiment(
  const SimConfig & cfg, const BinaryCovertChannel & ch, const Tolerances & tol = {})
{
  cfg.validate();
  const double alpha = cfg.alpha();
  const int n = cfg.n;
  ResolvabilityResult r;
  r.samples = cfg.samples;
  r.codebook_size = static_cast<std::size_t>(cfg.m_size) * static_cast<std::size_t>(cfg.l_size);
  r.bound = resolvability_rhs(ch, n, alpha, static_cast<double>(r.codebook_size), cfg.s_grid, cfg.beta_grid, tol);
  r.rhs = r.bound.value;

  std::optional<CommonEigenbasis> basis;
  RealVector qa;
  Matrix wan;
  if (cfg.path == ComputePath::Commuting) {
    basis = detail::require_commuting(ch, tol);
    detail::require_dense_budget(basis->w0.size(), n, cfg.max_classical_dim, "classical warden distribution");
    qa = detail::kron_power((1.0 - alpha) * basis->w0 + alpha * basis->w1, n);
  } else {
    detail::require_dense_budget(ch.omega0().dim(), n, cfg.max_dense_dim, "warden state");
    wan = tensor_power(mixed_output(ch, alpha).matrix(), n);
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int s = 0; s < cfg.samples; ++s) {
    const Codebook cb = sample_codebook(cfg, static_cast<std::uint64_t>(s));
    double dist = 0.0;
    if (basis) {
      dist = detail::classical_l1(willie_distribution(cb, *basis, 0, cb.m_size(), cfg.max_classical_dim), qa);
    } else {
      dist = trace_norm(detail::willie_dense(cb, ch, 0, cb.m_size(), ComputePath::Dense, cfg.max_dense_dim, tol) - wan, tol);
    }
    r.distances.push_back(dist);
    sum += dist;
    sum_sq += dist * dist;
  }
  const double k = static_cast<double>(cfg.samples);
  r.empirical_mean_distance = sum / k;
  if (cfg.samples > 1) {
    const double var = std::max(0.0, (sum_sq - k * r.empirical_mean_distance * r.empirical_mean_distance) / (k - 1.0));
    r.std_error = std::sqrt(var / k);
  }
  r.holds = r.empirical_mean_distance <= r.rhs + 3.0 * r.std_error;
  return r;
}

/// POVM elements plus the remainder I - sum E, which counts as an error.
struct Povm
{
  std::vector<Matrix> elements;
  Matrix abstain;
};

/// E_k = S^{-1/2} A_k S^{-1/2} with S = sum_k A_k; the inverse square root
/// acts on supp(S) only. With A_k = rho_k this is the pretty-good measurement.
inline Povm square_root_measurement(const std::vector<Matrix> & ops, const Tolerances & tol = {})
{
  if (ops.empty()) {
    throw Error(ErrorKind::InvalidParameter, "square-root measurement needs at least one operator");
  }
  Matrix s = Matrix::Zero(ops.front().rows(), ops.front().cols());
  for (const auto & a : ops) {
    require_same_dim(a, s);
    s += a;
  }
  const Matrix s_inv_sqrt = support_power(eigh(hermitian_part(s, tol.herm * static_cast<double>(ops.size())), tol), -0.5, tol);
  Povm out;
  Matrix total = Matrix::Zero(s.rows(), s.cols());
  for (const auto & a : ops) {
    Matrix e = s_inv_sqrt * a * s_inv_sqrt;
    e = 0.5 * (e + e.adjoint());
    total += e;
    out.elements.push_back(std::move(e));
  }
  out.abstain = Matrix::Identity(s.rows(), s.cols()) - total;
  return out;
}

struct DecoderReport
{
  /// Indexed like Codebook::words(), m * |L| + l.
  std::vector<double> per_message_error;
  double average_error = 0.0;
  double max_error = 0.0;
  double a_threshold = 0.0;
};

inline double default_a_threshold(const BinaryCovertChannel & ch, int n, double alpha, const Tolerances & tol = {})
{
  return 0.5 * alpha * n * qre(ch.sigma1(), ch.sigma0(), tol).to_double();
}

/// Pi_x = {E_{sigma0^(x)n}(sigma_x) - e^a sigma0^(x)n >= 0}, one per word.
inline std::vector<Matrix> threshold_projectors(
  const std::vector<Word> & words, const Matrix & sigma0, const Matrix & sigma1, double a,
  std::size_t max_dim = kDefaultMaxDenseDim, const Tolerances & tol = {})
{
  if (words.empty()) {
    throw Error(ErrorKind::InvalidParameter, "decoder needs at least one codeword");
  }
  const int n = static_cast<int>(words.front().size());
  detail::require_dense_budget(sigma0.rows(), n, max_dim, "receiver state");
  const Matrix s0n = tensor_power(sigma0, n);
  const SpectralDecomposition reference = spectral_decompose(s0n, tol);
  const double scale = std::exp(a);
  std::vector<Matrix> out;
  out.reserve(words.size());
  for (const auto & w : words) {
    const Matrix sx = product_state(w, sigma0, sigma1);
    out.push_back(nonneg_eigenspace_projector(pinching(sx, reference) - scale * s0n, tol));
  }
  return out;
}

inline std::vector<Matrix> threshold_projectors(
  const Codebook & cb, const BinaryCovertChannel & ch, double a,
  std::size_t max_dim = kDefaultMaxDenseDim, const Tolerances & tol = {})
{
  return threshold_projectors(cb.words(), ch.sigma0().matrix(), ch.sigma1().matrix(), a, max_dim, tol);
}

/// Error of each codeword under a POVM: 1 - tr[E_k rho_k].
inline DecoderReport decoder_report(const Povm & povm, const std::vector<Matrix> & states)
{
  if (povm.elements.size() != states.size() || states.empty()) {
    throw Error(ErrorKind::DimMismatch, "one POVM element per codeword state is required");
  }
  DecoderReport r;
  double total = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double success = (povm.elements[k].cwiseProduct(states[k].transpose())).sum().real();
    const double err = std::clamp(1.0 - success, 0.0, 1.0);
    r.per_message_error.push_back(err);
    total += err;
    r.max_error = std::max(r.max_error, err);
  }
  r.average_error = total / static_cast<double>(states.size());
  return r;
}

/// Receiver product states of every codeword, in codebook order.
inline std::vector<Matrix> receiver_states(
  const Codebook & cb, const BinaryCovertChannel & ch, std::size_t max_dim = kDefaultMaxDenseDim)
{
  detail::require_dense_budget(ch.sigma0().dim(), cb.n(), max_dim, "receiver state");
  std::vector<Matrix> out;
  for (const auto & w : cb.words()) {
    out.push_back(product_state(w, ch.sigma0().matrix(), ch.sigma1().matrix()));
  }
  return out;
}

/// Square-root measurement built from the threshold projectors.
inline Povm threshold_decoder(
  const Codebook & cb, const BinaryCovertChannel & ch, double a,
  std::size_t max_dim = kDefaultMaxDenseDim, const Tolerances & tol = {})
{
  return square_root_measurement(threshold_projectors(cb, ch, a, max_dim, tol), tol);
}

inline DecoderReport sqrt_measurement_decoder(
  const Codebook & cb, const BinaryCovertChannel & ch, const SimConfig & cfg, const Tolerances & tol = {})
{
  cfg.validate();
  if (cb.size() > cfg.max_decoder_codewords) {
    throw Error(
      ErrorKind::BudgetExceeded,
      "decoder limited to " + std::to_string(cfg.max_decoder_codewords) + " codewords, codebook has " +
      std::to_string(cb.size()));
  }
  const double a = cfg.a_threshold.value_or(default_a_threshold(ch, cb.n(), cfg.alpha(), tol));
  auto report = decoder_report(
    threshold_decoder(cb, ch, a, cfg.max_dense_dim, tol), receiver_states(cb, ch, cfg.max_dense_dim));
  report.a_threshold = a;
  return report;
}

/// Full `simulate` run. Sections that do not fit the budget are skipped
/// with a note instead of failing, except the covertness section.
struct SimulationReport
{
  SimConfig config;
  CovertnessReport covertness;
  std::optional<SecrecyReport> secrecy;
  std::optional<DecoderReport> decoder;
  std::optional<ResolvabilityResult> resolvability;
  std::vector<std::string> notes;
};

inline SimulationReport run_simulation(
  const BinaryCovertChannel & ch, const SimConfig & cfg, const Tolerances & tol = {})
{
  cfg.validate();
  SimulationReport r;
  r.config = cfg;
  const Codebook cb = sample_codebook(cfg, 0);
  r.covertness = covertness_report(cb, ch, cfg, tol);
  if (r.covertness.method == "commuting-monte-carlo") {
    r.notes.push_back("covertness-only run: blocklength exceeds the exact budget, metrics are Monte Carlo estimates");
    return r;
  }
  r.secrecy = secrecy_report(cb, ch, cfg, tol);
  r.resolvability = resolvability_experiment(cfg, ch, tol);
  const bool bob_fits =
    detail::checked_power(ch.sigma0().dim(), cfg.n, cfg.max_dense_dim) <= cfg.max_dense_dim;
  if (!bob_fits) {
    r.notes.push_back("decoder skipped: receiver dimension exceeds the dense budget");
  } else if (cb.size() > cfg.max_decoder_codewords) {
    r.notes.push_back(
      "decoder skipped: " + std::to_string(cb.size()) + " codewords exceed the limit of " +
      std::to_string(cfg.max_decoder_codewords));
  } else {
    r.decoder = sqrt_measurement_decoder(cb, ch, cfg, tol);
  }
  return r;
}

/// n D(omega_alpha || omega0) with alpha = gamma / sqrt(n), which tends to
/// gamma^2 chi^2(omega1 || omega0) / 2.
struct ScalingPoint
{
  int n = 0;
  double alpha = 0.0;
  double n_divergence = 0.0;
  double target = 0.0;
  double relative_deviation = 0.0;
};

inline std::vector<ScalingPoint> covertness_scaling(
  const BinaryCovertChannel & ch, double gamma, const std::vector<int> & ns, const Tolerances & tol = {})
{
  const auto basis = detail::require_commuting(ch, tol);
  const double target = 0.5 * gamma * gamma * covert_divergences(ch, tol).chi2_willie;
  std::vector<ScalingPoint> out;
  for (int n : ns) {
    if (n < 1) {
      throw Error(ErrorKind::InvalidParameter, "blocklength must be positive");
    }
    ScalingPoint p;
    p.n = n;
    p.alpha = gamma / std::sqrt(static_cast<double>(n));
    if (!(p.alpha <= 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "gamma / sqrt(n) exceeds 1");
    }
    const RealVector wa = (1.0 - p.alpha) * basis.w0 + p.alpha * basis.w1;
    p.n_divergence = n * detail::classical_kl(wa, basis.w0).to_double();
    p.target = target;
    p.relative_deviation = std::abs(p.n_divergence - target) / target;
    out.push_back(p);
  }
  return out;
}

}  // namespace covertq

#endif  // COVERTQ__COVERT_SIM_HPP_
